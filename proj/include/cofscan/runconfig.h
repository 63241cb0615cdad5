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

#ifndef COFSCAN_RUNCONFIG_H_
#define COFSCAN_RUNCONFIG_H_

// Scan configuration file. Example:
//
//   {
//     "run_id": "mnist",
//     "dataset": "data/mnist",
//     "run_dir": "runs/mnist",
//     "segmenter": {"kind": "dominant_color"},
//     "edits": [{"id": "shift", "kind": "solid_fill",
//                "palette_shift": {"palette": [[255,140,0], ...], "step": 1}}],
//     "classifier": {"kind": "dominant_color_rule", "palette": {...}},
//     "workers": 1
//   }
//
// Relative paths resolve against the directory holding the file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cofscan/cfsearch.h"
#include "cofscan/classifiers.h"
#include "cofscan/editors.h"
#include "cofscan/json.h"
#include "cofscan/toolproto.h"

namespace cofscan {

struct SegmenterConfig {
  std::string kind = "dominant_color";  // dominant_color | annotations | external
  std::optional<std::filesystem::path> annotations;  // default <dataset>/annotations.json
  std::optional<ToolCommand> tool;
  std::optional<std::string> prompt;
  bool fill_unrecognised = false;
};

struct ToolPoolConfig {
  int size = 1;
  int max_restarts = 2;
  ToolTimeouts timeouts;
};

struct RunConfig {
  std::string run_id;
  std::filesystem::path dataset;
  std::filesystem::path run_dir;
  SegmenterConfig segmenter;
  std::vector<EditSpec> edits;
  ClassifierRef classifier;
  bool flips_only = false;
  int workers = 1;
  uint64_t seed = 0;
  ToolPoolConfig tool_pool;

  // Effective configuration with resolved paths.
  Json ToJson() const;
  // Throws ConfigError.
  static RunConfig FromJson(const Json& j, const std::filesystem::path& base_dir);
  static RunConfig Load(const std::filesystem::path& path);
};

// COFSCAN_WORKERS overrides `configured` when set to a positive integer.
int EffectiveWorkers(int configured);

// Spawns the tool pools the config needs. Throws ConfigError for unusable
// configs and ToolError(kNondeterministic) for a classifier tool that does
// not declare itself deterministic.
Pipeline BuildPipeline(const RunConfig& config);

}  // namespace cofscan

#endif  // COFSCAN_RUNCONFIG_H_
