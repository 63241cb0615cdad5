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

#include "cofscan/error.h"

namespace cofscan {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRuns: return "MalformedRuns";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnknownImage: return "UnknownImage";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kInvalidLabel: return "InvalidLabel";
    case ErrorCode::kTemplateTooLarge: return "TemplateTooLarge";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::kFlipsOnlyLog: return "FlipsOnlyLog";
    case ErrorCode::kSegmentationFailed: return "SegmentationFailed";
    case ErrorCode::kEditFailed: return "EditFailed";
    case ErrorCode::kClassificationFailed: return "ClassificationFailed";
    case ErrorCode::kToolError: return "ToolError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

std::string_view ToolFailureName(ToolFailure failure) {
  switch (failure) {
    case ToolFailure::kTimeout: return "timeout";
    case ToolFailure::kCrashed: return "crashed";
    case ToolFailure::kMalformed: return "malformed";
    case ToolFailure::kRemoteError: return "remote-error";
    case ToolFailure::kSpawnFailed: return "spawn-failed";
    case ToolFailure::kHandshakeTimeout: return "handshake-timeout";
    case ToolFailure::kProtocolViolation: return "protocol-violation";
    case ToolFailure::kUnsupported: return "unsupported-op";
    case ToolFailure::kNondeterministic: return "nondeterministic";
  }
  return "unknown";
}

}  // namespace cofscan
