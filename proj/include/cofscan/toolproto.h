// Copyright 2026 The cofscan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COFSCAN_TOOLPROTO_H_
#define COFSCAN_TOOLPROTO_H_

// Line-delimited JSON protocol spoken with external tool processes over their
// stdin/stdout. One request line, one response line, strictly in order.
//
//   engine -> tool  {"id":0,"op":"hello"}
//   tool -> engine  {"id":0,"ok":true,"name":"...","version":"...",
//                    "ops":["classify"],"deterministic":true}
//   engine -> tool  {"id":1,"op":"classify","image_path":"/x.png"}
//   tool -> engine  {"id":1,"ok":true,"class":"3","scores":{"3":0.9}}
//
// Op payload fields may also be nested under "payload"; both are accepted.

#include <sys/types.h>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cofscan/json.h"
#include "cofscan/mask.h"

namespace cofscan {

struct ToolCommand {
  std::string program;
  std::vector<std::string> args;
  std::vector<std::pair<std::string, std::string>> env;

  Json ToJson() const;
  static ToolCommand FromJson(const Json& j);
};

struct ToolTimeouts {
  std::chrono::milliseconds handshake{10'000};
  std::chrono::milliseconds call{120'000};
};

struct ToolInfo {
  std::string name;
  std::string version;
  std::vector<std::string> ops;
  bool deterministic = false;

  bool Supports(std::string_view op) const;
  Json ToJson() const;
};

struct ToolRequest {
  uint64_t id = 0;
  std::string op;
  std::optional<std::string> image_path;
  std::optional<PixelMask> mask;
  std::optional<std::string> prompt;
  std::optional<std::string> out_path;

  // Single line, no trailing newline.
  std::string Serialize() const;
};

struct ToolResponse {
  uint64_t id = 0;
  bool ok = false;
  std::optional<std::string> error;
  Json payload = Json::object();

  // Throws ToolError(malformed) when the line is not a response object.
  static ToolResponse Parse(std::string_view line);
};

// One tool process. Not thread-safe: at most one in-flight request.
class ExternalTool {
 public:
  // Starts the process and completes the hello handshake. Throws ToolError
  // with kSpawnFailed, kHandshakeTimeout or kProtocolViolation.
  static std::unique_ptr<ExternalTool> Spawn(const ToolCommand& command,
                                             const ToolTimeouts& timeouts = {});

  ~ExternalTool();
  ExternalTool(const ExternalTool&) = delete;
  ExternalTool& operator=(const ExternalTool&) = delete;

  const ToolInfo& info() const { return info_; }
  bool alive() const { return alive_; }
  pid_t pid() const { return pid_; }

  // Assigns the next id, writes the request, and reads one response. A
  // response with ok=false throws ToolError(kRemoteError). Timeouts, crashes
  // and malformed responses leave the process dead.
  ToolResponse Call(ToolRequest request);

  // Writes `line` verbatim and returns the next response line unparsed.
  // Used by the conformance suite to probe error handling.
  std::string SendRaw(const std::string& line);

  void Kill();

 private:
  ExternalTool() = default;
  void WriteLine(const std::string& line);
  std::string ReadLine(std::chrono::milliseconds timeout, bool handshake);
  void Reap();

  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  bool alive_ = false;
  uint64_t next_id_ = 1;
  std::string buffer_;
  ToolInfo info_;
  ToolTimeouts timeouts_;
};

// N identical tool processes handed out as exclusive leases. A member that
// dies is restarted lazily; the pool allows at most `max_restarts` restarts
// over its lifetime, after which calls on dead members fail.
class ToolPool {
 public:
  ToolPool(ToolCommand command, int size, int max_restarts = 2,
           ToolTimeouts timeouts = {});
  ~ToolPool();

  const ToolInfo& info() const { return info_; }
  const ToolCommand& command() const { return command_; }
  int restarts() const;

  // Leases a member, performs the call, and returns the response.
  ToolResponse Call(ToolRequest request);

 private:
  std::unique_ptr<ExternalTool>& Acquire(std::size_t* slot);
  void Release(std::size_t slot);

  ToolCommand command_;
  ToolTimeouts timeouts_;
  int max_restarts_;
  ToolInfo info_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::unique_ptr<ExternalTool>> members_;
  std::vector<bool> busy_;
  int restarts_ = 0;
};

// Result of running the protocol conformance checks against a tool command.
struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Exercises handshake, id echo, ordering, per-op response shape and error
// handling. `scratch_dir` receives the probe images.
std::vector<ConformanceCheck> RunConformanceSuite(
    const ToolCommand& command, const std::string& scratch_dir,
    const ToolTimeouts& timeouts = {});

}  // namespace cofscan

#endif  // COFSCAN_TOOLPROTO_H_
