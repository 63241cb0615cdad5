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

#ifndef COFSCAN_COF_H_
#define COFSCAN_COF_H_

// Counterfactual Frequency tables.
//
// CoF(l) counts the (image, segment) trials whose segment carries label l and
// whose edit changed the predicted class. The modes differ only in the
// frequency column:
//
//   counts       frequency = CoF(l)
//   share        frequency = CoF(l) / all counterfactuals
//   per_image    frequency = images with a flip on l / all images
//   conditional  frequency = images with a flip on l / images containing l
//
// All denominators are taken after the row filters.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cofscan/error.h"
#include "cofscan/evaluation.h"
#include "cofscan/json.h"
#include "cofscan/mask.h"

namespace cofscan {

enum class CofMode { kCounts, kShare, kPerImage, kConditional };

std::string_view CofModeName(CofMode mode);
// Accepts "per_image" and "per-image". Throws InvalidArgument.
CofMode ParseCofMode(std::string_view name);

inline constexpr int kDefaultConditionalMinSupport = 20;

struct CofQuery {
  CofMode mode = CofMode::kCounts;
  std::optional<std::string> class_filter;  // original_class
  std::optional<PositionBucket> position;
  bool misclassified_only = false;
  bool corrected_only = false;
  std::optional<int> min_support;  // unset: 20 in conditional mode, else 0
  double min_frequency = 0.0;
  std::optional<int> top_k;
  std::optional<std::string> edit_id;

  int EffectiveMinSupport() const;
  Json ToJson() const;
  bool operator==(const CofQuery&) const = default;
};

struct CofRow {
  std::string label;
  int64_t count = 0;    // flipped trials with this label
  double frequency = 0.0;
  int64_t support = 0;  // images containing the label

  bool operator==(const CofRow&) const = default;
};

struct CofTable {
  std::vector<CofRow> rows;  // frequency descending, then label ascending
  int64_t total_counterfactuals = 0;
  int64_t total_images = 0;
  CofQuery query;
  // Set for position tables: the segment label whose flips are grouped, with
  // rows keyed by position bucket name.
  std::optional<std::string> by_position;
};

// Throws MissingGroundTruth when a ground-truth filter is requested and no
// row carries ground truth.
std::vector<Evaluation> ApplyRowFilters(const EvaluationSet& set,
                                        const CofQuery& query);

CofTable CofCounts(const EvaluationSet& set, CofQuery query);
CofTable CofShare(const EvaluationSet& set, CofQuery query);
// Throws FlipsOnlyLog for flips-only sets.
CofTable CofPerImage(const EvaluationSet& set, CofQuery query);
CofTable CofConditional(const EvaluationSet& set, CofQuery query);

// Dispatches on query.mode.
CofTable ComputeCof(const EvaluationSet& set, const CofQuery& query);

// One table per original class present after filtering.
std::map<std::string, CofTable> CofByClass(const EvaluationSet& set,
                                           const CofQuery& query);

// Share of `label`'s counterfactuals per position bucket.
CofTable GroupByPosition(const EvaluationSet& set, const std::string& label,
                         const CofQuery& query);

enum class TableFormat { kText, kCsv, kJson };
TableFormat ParseTableFormat(std::string_view name);

Json CofTableToJson(const CofTable& table);
Json CofByClassToJson(const std::map<std::string, CofTable>& tables,
                      const CofQuery& query);

std::string RenderTable(const CofTable& table, TableFormat format);
std::string RenderByClass(const std::map<std::string, CofTable>& tables,
                          const CofQuery& query, TableFormat format);

// A table request as issued by the CLI and the HTTP API: one plain table, one
// table per original class, or a position table for one label.
struct CofRequest {
  CofQuery query;
  bool mode_set = false;  // mode given explicitly
  bool by_class = false;
  std::optional<std::string> by_position;
};

// Names the offending request parameter (API spelling, e.g. "min_support").
class CofRequestError : public Error {
 public:
  CofRequestError(std::string param, const std::string& message)
      : Error(ErrorCode::kInvalidArgument, param + ": " + message),
        param_(std::move(param)) {}
  const std::string& param() const { return param_; }

 private:
  std::string param_;
};

// Validates the request and returns the JSON document for it. Ground-truth
// and flips-only failures are reported as CofRequestError against the
// parameter that caused them.
Json CofRequestJson(const EvaluationSet& set, const CofRequest& request);
std::string RenderCofRequest(const EvaluationSet& set, const CofRequest& request,
                             TableFormat format);

// "46.2%"
std::string FormatPercent(double fraction);

}  // namespace cofscan

#endif  // COFSCAN_COF_H_
