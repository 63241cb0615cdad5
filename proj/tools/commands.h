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

#ifndef COFSCAN_TOOLS_COMMANDS_H_
#define COFSCAN_TOOLS_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

namespace cofscan::cli {

// Exit codes: 0 success, 1 empty or none-found outcome, 2 usage/config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitEmpty = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cofscan::cli

#endif  // COFSCAN_TOOLS_COMMANDS_H_
