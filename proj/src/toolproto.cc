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

#include "cofscan/toolproto.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <thread>

#include "cofscan/error.h"
#include "cofscan/image.h"

extern char** environ;

namespace cofscan {

Json ToolCommand::ToJson() const {
  Json j;
  j["program"] = program;
  j["args"] = args;
  Json env_obj = Json::object();
  for (const auto& [k, v] : env) env_obj[k] = v;
  j["env"] = env_obj;
  return j;
}

ToolCommand ToolCommand::FromJson(const Json& j) {
  ToolCommand c;
  if (j.is_string()) {
    c.program = j.get<std::string>();
    return c;
  }
  if (j.is_array()) {
    if (j.empty()) throw Error(ErrorCode::kConfigError, "empty tool command");
    c.program = j[0].get<std::string>();
    for (std::size_t i = 1; i < j.size(); ++i) c.args.push_back(j[i].get<std::string>());
    return c;
  }
  if (!j.is_object() || !j.contains("program")) {
    throw Error(ErrorCode::kConfigError, "tool needs a \"program\"");
  }
  c.program = j["program"].get<std::string>();
  if (j.contains("args")) c.args = j["args"].get<std::vector<std::string>>();
  if (j.contains("env")) {
    for (const auto& [k, v] : j["env"].items()) {
      c.env.emplace_back(k, v.get<std::string>());
    }
  }
  return c;
}

bool ToolInfo::Supports(std::string_view op) const {
  return std::find(ops.begin(), ops.end(), op) != ops.end();
}

Json ToolInfo::ToJson() const {
  Json j;
  j["name"] = name;
  j["version"] = version;
  j["ops"] = ops;
  j["deterministic"] = deterministic;
  return j;
}

std::string ToolRequest::Serialize() const {
  Json j;
  j["id"] = id;
  j["op"] = op;
  if (image_path) j["image_path"] = *image_path;
  if (mask) j["mask"] = MaskToJson(*mask);
  if (prompt) j["prompt"] = *prompt;
  if (out_path) j["out_path"] = *out_path;
  return j.dump();
}

ToolResponse ToolResponse::Parse(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::exception& e) {
    throw ToolError(ToolFailure::kMalformed,
                    "response is not JSON: " + std::string(e.what()));
  }
  if (!j.is_object() || !j.contains("id") || !j["id"].is_number_unsigned() ||
      !j.contains("ok") || !j["ok"].is_boolean()) {
    throw ToolError(ToolFailure::kMalformed,
                    "response needs integer \"id\" and boolean \"ok\"");
  }
  ToolResponse r;
  r.id = j["id"].get<uint64_t>();
  r.ok = j["ok"].get<bool>();
  if (j.contains("error") && j["error"].is_string()) {
    r.error = j["error"].get<std::string>();
  }
  if (j.contains("payload") && j["payload"].is_object()) {
    r.payload = j["payload"];
  } else {
    for (const auto& [k, v] : j.items()) {
      if (k != "id" && k != "ok" && k != "error") r.payload[k] = v;
    }
  }
  return r;
}

namespace {

void IgnoreSigpipeOnce() {
  static const bool done = [] {
    signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

std::vector<std::string> BuildEnvironment(
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::vector<std::string> env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string_view entry(*e);
    const auto eq = entry.find('=');
    const std::string_view key = entry.substr(0, eq);
    const bool overridden =
        std::any_of(overrides.begin(), overrides.end(),
                    [&](const auto& kv) { return kv.first == key; });
    if (!overridden) env.emplace_back(entry);
  }
  for (const auto& [k, v] : overrides) env.push_back(k + "=" + v);
  return env;
}

}  // namespace

std::unique_ptr<ExternalTool> ExternalTool::Spawn(const ToolCommand& command,
                                                  const ToolTimeouts& timeouts) {
  IgnoreSigpipeOnce();
  if (command.program.empty()) {
    throw ToolError(ToolFailure::kSpawnFailed, "empty program");
  }
  int in_pipe[2];
  int out_pipe[2];
  int err_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw ToolError(ToolFailure::kSpawnFailed, std::strerror(errno));
  }
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw ToolError(ToolFailure::kSpawnFailed, std::strerror(errno));
  }
  if (pipe2(err_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    throw ToolError(ToolFailure::kSpawnFailed, std::strerror(errno));
  }

  std::vector<std::string> argv_storage;
  argv_storage.push_back(command.program);
  argv_storage.insert(argv_storage.end(), command.args.begin(), command.args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  std::vector<std::string> env_storage = BuildEnvironment(command.env);
  std::vector<char*> envp;
  for (auto& s : env_storage) envp.push_back(s.data());
  envp.push_back(nullptr);

  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0],
                   err_pipe[1]}) {
      close(fd);
    }
    throw ToolError(ToolFailure::kSpawnFailed, std::strerror(errno));
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execvpe(argv[0], argv.data(), envp.data());
    const int code = errno;
    ssize_t ignored = write(err_pipe[1], &code, sizeof(code));
    (void)ignored;
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);

  int exec_errno = 0;
  ssize_t n;
  do {
    n = read(err_pipe[0], &exec_errno, sizeof(exec_errno));
  } while (n < 0 && errno == EINTR);
  close(err_pipe[0]);
  if (n > 0) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    waitpid(pid, nullptr, 0);
    throw ToolError(ToolFailure::kSpawnFailed,
                    command.program + ": " + std::strerror(exec_errno));
  }

  std::unique_ptr<ExternalTool> tool(new ExternalTool());
  tool->pid_ = pid;
  tool->to_child_ = in_pipe[1];
  tool->from_child_ = out_pipe[0];
  tool->alive_ = true;
  tool->timeouts_ = timeouts;

  tool->WriteLine(R"({"id":0,"op":"hello"})");
  const std::string line = tool->ReadLine(timeouts.handshake, true);
  ToolResponse hello;
  try {
    hello = ToolResponse::Parse(line);
  } catch (const ToolError& e) {
    tool->Kill();
    throw ToolError(ToolFailure::kProtocolViolation, e.what());
  }
  const Json& p = hello.payload;
  if (hello.id != 0 || !hello.ok || !p.contains("name") ||
      !p["name"].is_string() || !p.contains("ops") || !p["ops"].is_array()) {
    tool->Kill();
    throw ToolError(ToolFailure::kProtocolViolation,
                    "hello response must echo id 0 with ok, name and ops");
  }
  tool->info_.name = p["name"].get<std::string>();
  if (p.contains("version") && p["version"].is_string()) {
    tool->info_.version = p["version"].get<std::string>();
  }
  for (const auto& op : p["ops"]) {
    if (!op.is_string()) {
      tool->Kill();
      throw ToolError(ToolFailure::kProtocolViolation, "ops must be strings");
    }
    tool->info_.ops.push_back(op.get<std::string>());
  }
  tool->info_.deterministic =
      p.contains("deterministic") && p["deterministic"].is_boolean() &&
      p["deterministic"].get<bool>();
  return tool;
}

ExternalTool::~ExternalTool() {
  if (to_child_ >= 0) close(to_child_);
  to_child_ = -1;
  if (pid_ > 0) {
    // Closing stdin asks the tool to exit; give it a moment before killing.
    for (int i = 0; i < 50; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
  }
  if (from_child_ >= 0) close(from_child_);
}

void ExternalTool::Kill() { Reap(); }

void ExternalTool::Reap() {
  if (pid_ > 0) {
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
  alive_ = false;
}

void ExternalTool::WriteLine(const std::string& line) {
  std::string data = line;
  data.push_back('\n');
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      Reap();
      throw ToolError(ToolFailure::kCrashed,
                      std::string("write to tool failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string ExternalTool::ReadLine(std::chrono::milliseconds timeout,
                                   bool handshake) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      Reap();
      throw ToolError(handshake ? ToolFailure::kHandshakeTimeout
                                : ToolFailure::kTimeout,
                      "no response within " + std::to_string(timeout.count()) +
                          " ms");
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      Reap();
      throw ToolError(ToolFailure::kCrashed, std::strerror(errno));
    }
    if (rc == 0) continue;
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      Reap();
      throw ToolError(ToolFailure::kCrashed, std::strerror(errno));
    }
    if (n == 0) {
      Reap();
      throw ToolError(handshake ? ToolFailure::kProtocolViolation
                                : ToolFailure::kCrashed,
                      "tool closed its output");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

ToolResponse ExternalTool::Call(ToolRequest request) {
  if (!alive_) throw ToolError(ToolFailure::kCrashed, "tool is not running");
  if (!info_.Supports(request.op)) {
    throw ToolError(ToolFailure::kUnsupported,
                    "tool '" + info_.name + "' does not advertise op '" +
                        request.op + "'");
  }
  request.id = next_id_++;
  WriteLine(request.Serialize());
  const std::string line = ReadLine(timeouts_.call, false);
  ToolResponse response;
  try {
    response = ToolResponse::Parse(line);
  } catch (const ToolError&) {
    Reap();
    throw;
  }
  if (response.id != request.id) {
    Reap();
    throw ToolError(ToolFailure::kMalformed,
                    "response id " + std::to_string(response.id) +
                        " does not match request id " +
                        std::to_string(request.id));
  }
  if (!response.ok) {
    throw ToolError(ToolFailure::kRemoteError,
                    response.error.value_or("tool reported failure"));
  }
  return response;
}

std::string ExternalTool::SendRaw(const std::string& line) {
  if (!alive_) throw ToolError(ToolFailure::kCrashed, "tool is not running");
  WriteLine(line);
  return ReadLine(timeouts_.call, false);
}

ToolPool::ToolPool(ToolCommand command, int size, int max_restarts,
                   ToolTimeouts timeouts)
    : command_(std::move(command)),
      timeouts_(timeouts),
      max_restarts_(max_restarts) {
  if (size < 1) size = 1;
  for (int i = 0; i < size; ++i) {
    members_.push_back(ExternalTool::Spawn(command_, timeouts_));
    busy_.push_back(false);
  }
  info_ = members_.front()->info();
}

ToolPool::~ToolPool() = default;

int ToolPool::restarts() const {
  std::lock_guard<std::mutex> lock(mu_);
  return restarts_;
}

std::unique_ptr<ExternalTool>& ToolPool::Acquire(std::size_t* slot) {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [&] {
    return std::find(busy_.begin(), busy_.end(), false) != busy_.end();
  });
  const auto it = std::find(busy_.begin(), busy_.end(), false);
  *slot = static_cast<std::size_t>(it - busy_.begin());
  busy_[*slot] = true;
  auto& member = members_[*slot];
  if (member == nullptr || !member->alive()) {
    if (restarts_ >= max_restarts_) {
      busy_[*slot] = false;
      cv_.notify_one();
      throw ToolError(ToolFailure::kCrashed,
                      "tool '" + info_.name + "' restart budget exhausted");
    }
    ++restarts_;
    lock.unlock();
    try {
      member.reset();
      member = ExternalTool::Spawn(command_, timeouts_);
    } catch (...) {
      lock.lock();
      busy_[*slot] = false;
      cv_.notify_one();
      throw;
    }
  }
  return member;
}

void ToolPool::Release(std::size_t slot) {
  std::lock_guard<std::mutex> lock(mu_);
  busy_[slot] = false;
  cv_.notify_one();
}

ToolResponse ToolPool::Call(ToolRequest request) {
  std::size_t slot = 0;
  auto& member = Acquire(&slot);
  try {
    ToolResponse r = member->Call(std::move(request));
    Release(slot);
    return r;
  } catch (...) {
    Release(slot);
    throw;
  }
}

}  // namespace cofscan
