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

#ifndef COFSCAN_EVALUATION_H_
#define COFSCAN_EVALUATION_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cofscan/json.h"
#include "cofscan/mask.h"

namespace cofscan {

// One (image, segment, edit) trial. `flipped` is edited_class != original_class.
struct Evaluation {
  std::string run_id;
  std::string image_id;
  int segment_index = 0;
  std::string segment_label;
  std::string edit_id;
  PositionBucket position = PositionBucket::kTopLeft;
  double area_frac = 0.0;
  std::string original_class;
  std::string edited_class;
  std::optional<std::string> ground_truth;
  bool flipped = false;

  bool operator==(const Evaluation&) const = default;
};

// Keys in the fixed order run_id, image_id, segment_index, segment_label,
// edit_id, position, area_frac, original_class, edited_class, ground_truth,
// flipped.
Json EvaluationToJson(const Evaluation& e);
// Throws InvalidArgument on missing keys or an inconsistent flipped flag.
Evaluation EvaluationFromJson(const Json& j);

// Orders by image_id, segment_index, edit_id.
bool CanonicalLess(const Evaluation& a, const Evaluation& b);
void SortCanonical(std::vector<Evaluation>* rows);

// The evaluations of one run. `flips_only` marks logs that dropped
// non-counterfactual rows and therefore cannot support presence-based modes.
struct EvaluationSet {
  std::string run_id;
  std::vector<Evaluation> rows;
  bool flips_only = false;

  bool HasGroundTruth() const;
};

std::string SerializeEvaluations(const std::vector<Evaluation>& rows);
void WriteEvaluations(const std::filesystem::path& path,
                      const std::vector<Evaluation>& rows);
std::vector<Evaluation> ParseEvaluations(std::string_view text);
std::vector<Evaluation> ReadEvaluations(const std::filesystem::path& path);

// Accepts either a run directory (evaluations.jsonl + manifest.json) or a bare
// evaluations file.
EvaluationSet LoadEvaluationSet(const std::filesystem::path& path);

}  // namespace cofscan

#endif  // COFSCAN_EVALUATION_H_
