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

#include "cofscan/cof.h"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "cofscan/error.h"

namespace cofscan {

std::string_view CofModeName(CofMode mode) {
  switch (mode) {
    case CofMode::kCounts: return "counts";
    case CofMode::kShare: return "share";
    case CofMode::kPerImage: return "per_image";
    case CofMode::kConditional: return "conditional";
  }
  return "counts";
}

CofMode ParseCofMode(std::string_view name) {
  if (name == "counts") return CofMode::kCounts;
  if (name == "share") return CofMode::kShare;
  if (name == "per_image" || name == "per-image") return CofMode::kPerImage;
  if (name == "conditional") return CofMode::kConditional;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + std::string(name) + "'");
}

int CofQuery::EffectiveMinSupport() const {
  if (min_support) return *min_support;
  return mode == CofMode::kConditional ? kDefaultConditionalMinSupport : 0;
}

Json CofQuery::ToJson() const {
  Json j;
  j["mode"] = CofModeName(mode);
  j["class"] = class_filter ? Json(*class_filter) : Json(nullptr);
  j["position"] = position ? Json(PositionName(*position)) : Json(nullptr);
  j["misclassified_only"] = misclassified_only;
  j["corrected_only"] = corrected_only;
  j["min_support"] = EffectiveMinSupport();
  j["min_frequency"] = min_frequency;
  j["top_k"] = top_k ? Json(*top_k) : Json(nullptr);
  j["edit_id"] = edit_id ? Json(*edit_id) : Json(nullptr);
  return j;
}

std::vector<Evaluation> ApplyRowFilters(const EvaluationSet& set,
                                        const CofQuery& query) {
  if ((query.misclassified_only || query.corrected_only) && !set.HasGroundTruth()) {
    throw Error(ErrorCode::kMissingGroundTruth,
                "ground-truth filter requested but the evaluations carry no ground truth");
  }
  std::vector<Evaluation> out;
  for (const Evaluation& e : set.rows) {
    if (query.class_filter && e.original_class != *query.class_filter) continue;
    if (query.position && e.position != *query.position) continue;
    if (query.edit_id && e.edit_id != *query.edit_id) continue;
    if (query.misclassified_only &&
        (!e.ground_truth || e.original_class == *e.ground_truth)) {
      continue;
    }
    if (query.corrected_only &&
        (!e.flipped || !e.ground_truth || e.original_class == *e.ground_truth ||
         e.edited_class != *e.ground_truth)) {
      continue;
    }
    out.push_back(e);
  }
  return out;
}

namespace {

struct LabelStats {
  int64_t flips = 0;
  std::unordered_set<std::string> present_images;
  std::unordered_set<std::string> flipped_images;
};

void CheckModeAllowed(const EvaluationSet& set, CofMode mode) {
  if (set.flips_only && (mode == CofMode::kPerImage || mode == CofMode::kConditional)) {
    throw Error(ErrorCode::kFlipsOnlyLog,
                std::string(CofModeName(mode)) +
                    " mode needs every evaluation, but this log holds flips only");
  }
}

void FinishRows(CofTable* table) {
  const CofQuery& q = table->query;
  const int min_support = q.EffectiveMinSupport();
  std::vector<CofRow> kept;
  for (auto& row : table->rows) {
    if (row.support < min_support) continue;
    if (row.frequency < q.min_frequency) continue;
    kept.push_back(std::move(row));
  }
  std::sort(kept.begin(), kept.end(), [](const CofRow& a, const CofRow& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.label < b.label;
  });
  if (q.top_k && static_cast<int>(kept.size()) > *q.top_k) {
    kept.resize(static_cast<std::size_t>(std::max(*q.top_k, 0)));
  }
  table->rows = std::move(kept);
}

// Rows must already be filtered.
CofTable BuildTable(const std::vector<Evaluation>& rows, const CofQuery& query) {
  CofTable table;
  table.query = query;
  std::unordered_set<std::string> images;
  std::map<std::string, LabelStats> stats;
  for (const Evaluation& e : rows) {
    images.insert(e.image_id);
    LabelStats& s = stats[e.segment_label];
    s.present_images.insert(e.image_id);
    if (e.flipped) {
      ++s.flips;
      ++table.total_counterfactuals;
      s.flipped_images.insert(e.image_id);
    }
  }
  table.total_images = static_cast<int64_t>(images.size());
  for (const auto& [label, s] : stats) {
    CofRow row;
    row.label = label;
    row.count = s.flips;
    row.support = static_cast<int64_t>(s.present_images.size());
    switch (query.mode) {
      case CofMode::kCounts:
        row.frequency = static_cast<double>(s.flips);
        break;
      case CofMode::kShare:
        row.frequency = table.total_counterfactuals > 0
                            ? static_cast<double>(s.flips) /
                                  static_cast<double>(table.total_counterfactuals)
                            : 0.0;
        break;
      case CofMode::kPerImage:
        row.frequency = static_cast<double>(s.flipped_images.size()) /
                        static_cast<double>(table.total_images);
        break;
      case CofMode::kConditional:
        row.frequency = static_cast<double>(s.flipped_images.size()) /
                        static_cast<double>(row.support);
        break;
    }
    if (query.mode != CofMode::kConditional && row.count == 0) continue;
    table.rows.push_back(std::move(row));
  }
  FinishRows(&table);
  return table;
}

CofTable WithMode(const EvaluationSet& set, CofQuery query, CofMode mode) {
  query.mode = mode;
  return ComputeCof(set, query);
}

}  // namespace

CofTable ComputeCof(const EvaluationSet& set, const CofQuery& query) {
  CheckModeAllowed(set, query.mode);
  return BuildTable(ApplyRowFilters(set, query), query);
}

CofTable CofCounts(const EvaluationSet& set, CofQuery query) {
  return WithMode(set, std::move(query), CofMode::kCounts);
}
CofTable CofShare(const EvaluationSet& set, CofQuery query) {
  return WithMode(set, std::move(query), CofMode::kShare);
}
CofTable CofPerImage(const EvaluationSet& set, CofQuery query) {
  return WithMode(set, std::move(query), CofMode::kPerImage);
}
CofTable CofConditional(const EvaluationSet& set, CofQuery query) {
  return WithMode(set, std::move(query), CofMode::kConditional);
}

std::map<std::string, CofTable> CofByClass(const EvaluationSet& set,
                                           const CofQuery& query) {
  CheckModeAllowed(set, query.mode);
  std::map<std::string, std::vector<Evaluation>> partitions;
  for (Evaluation& e : ApplyRowFilters(set, query)) {
    partitions[e.original_class].push_back(std::move(e));
  }
  std::map<std::string, CofTable> out;
  for (const auto& [cls, rows] : partitions) out[cls] = BuildTable(rows, query);
  return out;
}

CofTable GroupByPosition(const EvaluationSet& set, const std::string& label,
                         const CofQuery& query) {
  CofTable table;
  table.query = query;
  table.query.mode = CofMode::kShare;
  table.by_position = label;
  std::unordered_set<std::string> images;
  std::map<PositionBucket, int64_t> flips;
  std::map<PositionBucket, std::unordered_set<std::string>> present;
  for (const Evaluation& e : ApplyRowFilters(set, table.query)) {
    if (e.segment_label != label) continue;
    images.insert(e.image_id);
    present[e.position].insert(e.image_id);
    if (e.flipped) {
      ++flips[e.position];
      ++table.total_counterfactuals;
    }
  }
  table.total_images = static_cast<int64_t>(images.size());
  for (const auto& [bucket, n] : flips) {
    CofRow row;
    row.label = std::string(PositionName(bucket));
    row.count = n;
    row.frequency =
        static_cast<double>(n) / static_cast<double>(table.total_counterfactuals);
    row.support = static_cast<int64_t>(present[bucket].size());
    table.rows.push_back(std::move(row));
  }
  FinishRows(&table);
  return table;
}

}  // namespace cofscan
