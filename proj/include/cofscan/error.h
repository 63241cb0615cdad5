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

#ifndef COFSCAN_ERROR_H_
#define COFSCAN_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cofscan {

enum class ErrorCode {
  kMalformedRuns,
  kEmptyMask,
  kDimensionMismatch,
  kInvalidArgument,
  kIoError,
  kUnknownImage,
  kEmptyDataset,
  kInvalidLabel,
  kTemplateTooLarge,
  kMissingGroundTruth,
  kFlipsOnlyLog,
  kSegmentationFailed,
  kEditFailed,
  kClassificationFailed,
  kToolError,
  kConfigError,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Failure modes of an external tool process. The first four surface from
// tool_call; the last three from tool_spawn.
enum class ToolFailure {
  kTimeout,
  kCrashed,
  kMalformed,
  kRemoteError,
  kSpawnFailed,
  kHandshakeTimeout,
  kProtocolViolation,
  kUnsupported,
  kNondeterministic,
};

std::string_view ToolFailureName(ToolFailure failure);

class ToolError : public Error {
 public:
  ToolError(ToolFailure failure, const std::string& message)
      : Error(ErrorCode::kToolError,
              std::string(ToolFailureName(failure)) + ": " + message),
        failure_(failure) {}

  ToolFailure failure() const { return failure_; }

 private:
  ToolFailure failure_;
};

}  // namespace cofscan

#endif  // COFSCAN_ERROR_H_
