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

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

#include "cofscan/cof.h"
#include "cofscan/error.h"

namespace cofscan {

TableFormat ParseTableFormat(std::string_view name) {
  if (name == "text") return TableFormat::kText;
  if (name == "csv") return TableFormat::kCsv;
  if (name == "json") return TableFormat::kJson;
  throw Error(ErrorCode::kInvalidArgument, "unknown format '" + std::string(name) + "'");
}

std::string FormatPercent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", fraction * 100.0);
  return buf;
}

Json CofTableToJson(const CofTable& table) {
  Json j;
  j["mode"] = CofModeName(table.query.mode);
  if (table.by_position) j["by_position"] = *table.by_position;
  j["query"] = table.query.ToJson();
  j["total_counterfactuals"] = table.total_counterfactuals;
  j["total_images"] = table.total_images;
  Json rows = Json::array();
  for (const CofRow& r : table.rows) {
    Json row;
    row["label"] = r.label;
    row["count"] = r.count;
    row["frequency"] = r.frequency;
    row["support"] = r.support;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

Json CofByClassToJson(const std::map<std::string, CofTable>& tables,
                      const CofQuery& query) {
  Json j;
  j["mode"] = CofModeName(query.mode);
  j["query"] = query.ToJson();
  Json by_class = Json::object();
  for (const auto& [cls, table] : tables) by_class[cls] = CofTableToJson(table);
  j["by_class"] = std::move(by_class);
  return j;
}

namespace {

std::string DenominatorCaption(const CofTable& t) {
  const auto n = [](int64_t v) { return std::to_string(v); };
  if (t.by_position) {
    return "position share of '" + *t.by_position + "' (frequency = count / " +
           n(t.total_counterfactuals) + " counterfactuals of that label)";
  }
  switch (t.query.mode) {
    case CofMode::kCounts:
      return "counts (frequency = number of counterfactuals; " +
             n(t.total_counterfactuals) + " total over " + n(t.total_images) + " images)";
    case CofMode::kShare:
      return "share (frequency = count / " + n(t.total_counterfactuals) +
             " counterfactuals)";
    case CofMode::kPerImage:
      return "per_image (frequency = images with a counterfactual on the label / " +
             n(t.total_images) + " images)";
    case CofMode::kConditional:
      return "conditional (frequency = images with a counterfactual on the label / "
             "support; min_support " +
             n(t.query.EffectiveMinSupport()) + ")";
  }
  return "";
}

std::string FrequencyCell(const CofTable& t, const CofRow& r) {
  if (t.query.mode == CofMode::kCounts && !t.by_position) return std::to_string(r.count);
  return FormatPercent(r.frequency);
}

std::string CsvEscape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string FullPrecision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string RenderText(const CofTable& t) {
  const char* first = t.by_position ? "position" : "label";
  std::vector<std::array<std::string, 4>> cells;
  cells.push_back({first, "count", "frequency", "support"});
  for (const CofRow& r : t.rows) {
    cells.push_back({r.label, std::to_string(r.count), FrequencyCell(t, r),
                     std::to_string(r.support)});
  }
  std::array<std::size_t, 4> width{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  out << "mode: " << DenominatorCaption(t) << "\n";
  for (const auto& row : cells) {
    out << row[0] << std::string(width[0] - row[0].size(), ' ');
    for (std::size_t c = 1; c < 4; ++c) {
      out << "  " << std::string(width[c] - row[c].size(), ' ') << row[c];
    }
    out << "\n";
  }
  return out.str();
}

std::string RenderCsv(const CofTable& t) {
  std::ostringstream out;
  out << "label,count,frequency,support\n";
  for (const CofRow& r : t.rows) {
    out << CsvEscape(r.label) << "," << r.count << "," << FullPrecision(r.frequency)
        << "," << r.support << "\n";
  }
  return out.str();
}

}  // namespace

std::string RenderTable(const CofTable& table, TableFormat format) {
  switch (format) {
    case TableFormat::kText: return RenderText(table);
    case TableFormat::kCsv: return RenderCsv(table);
    case TableFormat::kJson: return CofTableToJson(table).dump(2) + "\n";
  }
  return "";
}

std::string RenderByClass(const std::map<std::string, CofTable>& tables,
                          const CofQuery& query, TableFormat format) {
  switch (format) {
    case TableFormat::kJson:
      return CofByClassToJson(tables, query).dump(2) + "\n";
    case TableFormat::kCsv: {
      std::ostringstream out;
      out << "class,label,count,frequency,support\n";
      for (const auto& [cls, t] : tables) {
        for (const CofRow& r : t.rows) {
          out << CsvEscape(cls) << "," << CsvEscape(r.label) << "," << r.count << ","
              << FullPrecision(r.frequency) << "," << r.support << "\n";
        }
      }
      return out.str();
    }
    case TableFormat::kText: {
      std::ostringstream out;
      for (const auto& [cls, t] : tables) {
        out << "class " << cls << "\n" << RenderText(t) << "\n";
      }
      return out.str();
    }
  }
  return "";
}

namespace {

void ValidateRequest(const CofRequest& r) {
  const CofQuery& q = r.query;
  if (r.by_class && r.by_position) {
    throw CofRequestError("by_position", "cannot be combined with by_class");
  }
  if (r.by_position && r.mode_set && q.mode != CofMode::kShare) {
    throw CofRequestError("mode", "position tables are share tables");
  }
  if (r.by_position && r.by_position->empty()) {
    throw CofRequestError("by_position", "label is empty");
  }
  if (q.min_support && *q.min_support < 0) {
    throw CofRequestError("min_support", "must be >= 0");
  }
  if (!(q.min_frequency >= 0.0 && q.min_frequency <= 1.0)) {
    throw CofRequestError("min_frequency", "must be in [0, 1]");
  }
  if (q.top_k && *q.top_k < 1) throw CofRequestError("top_k", "must be >= 1");
}

template <typename Fn>
auto WithRequestErrors(const CofRequest& r, Fn fn) {
  ValidateRequest(r);
  try {
    return fn();
  } catch (const CofRequestError&) {
    throw;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMissingGroundTruth) {
      throw CofRequestError(r.query.corrected_only ? "corrected_only" : "misclassified_only",
                            "the evaluations carry no ground truth");
    }
    if (e.code() == ErrorCode::kFlipsOnlyLog) {
      throw CofRequestError("mode", std::string(CofModeName(r.query.mode)) +
                                        " needs a full evaluations log, not a flips-only one");
    }
    throw;
  }
}

}  // namespace

Json CofRequestJson(const EvaluationSet& set, const CofRequest& request) {
  return WithRequestErrors(request, [&] {
    if (request.by_class) return CofByClassToJson(CofByClass(set, request.query), request.query);
    if (request.by_position) {
      return CofTableToJson(GroupByPosition(set, *request.by_position, request.query));
    }
    return CofTableToJson(ComputeCof(set, request.query));
  });
}

std::string RenderCofRequest(const EvaluationSet& set, const CofRequest& request,
                             TableFormat format) {
  if (format == TableFormat::kJson) return CofRequestJson(set, request).dump(2) + "\n";
  return WithRequestErrors(request, [&] {
    if (request.by_class) {
      return RenderByClass(CofByClass(set, request.query), request.query, format);
    }
    if (request.by_position) {
      return RenderTable(GroupByPosition(set, *request.by_position, request.query), format);
    }
    return RenderTable(ComputeCof(set, request.query), format);
  });
}

}  // namespace cofscan
