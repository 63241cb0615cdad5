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

#include "cofscan/evaluation.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "cofscan/error.h"

namespace cofscan {

Json EvaluationToJson(const Evaluation& e) {
  Json j;
  j["run_id"] = e.run_id;
  j["image_id"] = e.image_id;
  j["segment_index"] = e.segment_index;
  j["segment_label"] = e.segment_label;
  j["edit_id"] = e.edit_id;
  j["position"] = PositionName(e.position);
  j["area_frac"] = e.area_frac;
  j["original_class"] = e.original_class;
  j["edited_class"] = e.edited_class;
  j["ground_truth"] = e.ground_truth ? Json(*e.ground_truth) : Json(nullptr);
  j["flipped"] = e.flipped;
  return j;
}

namespace {

const Json& Field(const Json& j, const char* key) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("evaluation lacks \"") + key + "\"");
  }
  return j[key];
}

std::string StringField(const Json& j, const char* key) {
  const Json& v = Field(j, key);
  if (!v.is_string()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("evaluation \"") + key + "\" must be a string");
  }
  return v.get<std::string>();
}

}  // namespace

Evaluation EvaluationFromJson(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "evaluation must be an object");
  Evaluation e;
  e.run_id = StringField(j, "run_id");
  e.image_id = StringField(j, "image_id");
  e.segment_index = Field(j, "segment_index").get<int>();
  e.segment_label = StringField(j, "segment_label");
  e.edit_id = StringField(j, "edit_id");
  e.position = ParsePosition(StringField(j, "position"));
  e.area_frac = Field(j, "area_frac").get<double>();
  e.original_class = StringField(j, "original_class");
  e.edited_class = StringField(j, "edited_class");
  const Json& gt = Field(j, "ground_truth");
  if (!gt.is_null()) e.ground_truth = gt.get<std::string>();
  const Json& flipped = Field(j, "flipped");
  if (!flipped.is_boolean()) {
    throw Error(ErrorCode::kInvalidArgument, "evaluation \"flipped\" must be boolean");
  }
  e.flipped = flipped.get<bool>();
  if (e.flipped != (e.original_class != e.edited_class)) {
    throw Error(ErrorCode::kInvalidArgument,
                "flipped flag disagrees with classes for image '" + e.image_id + "'");
  }
  return e;
}

bool CanonicalLess(const Evaluation& a, const Evaluation& b) {
  return std::tie(a.image_id, a.segment_index, a.edit_id) <
         std::tie(b.image_id, b.segment_index, b.edit_id);
}

void SortCanonical(std::vector<Evaluation>* rows) {
  std::stable_sort(rows->begin(), rows->end(), CanonicalLess);
}

bool EvaluationSet::HasGroundTruth() const {
  return std::any_of(rows.begin(), rows.end(),
                     [](const Evaluation& e) { return e.ground_truth.has_value(); });
}

std::string SerializeEvaluations(const std::vector<Evaluation>& rows) {
  std::string out;
  for (const auto& e : rows) {
    out += EvaluationToJson(e).dump();
    out.push_back('\n');
  }
  return out;
}

void WriteEvaluations(const std::filesystem::path& path,
                      const std::vector<Evaluation>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << SerializeEvaluations(rows);
}

std::vector<Evaluation> ParseEvaluations(std::string_view text) {
  std::vector<Evaluation> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      rows.push_back(EvaluationFromJson(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  "evaluations line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  "evaluations line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<Evaluation> ReadEvaluations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseEvaluations(ss.str());
}

EvaluationSet LoadEvaluationSet(const std::filesystem::path& path) {
  EvaluationSet set;
  if (std::filesystem::is_directory(path)) {
    set.rows = ReadEvaluations(path / "evaluations.jsonl");
    const auto manifest_path = path / "manifest.json";
    if (std::filesystem::exists(manifest_path)) {
      std::ifstream in(manifest_path);
      const Json manifest = Json::parse(in, nullptr, false);
      if (manifest.is_discarded()) {
        throw Error(ErrorCode::kInvalidArgument, "corrupt " + manifest_path.string());
      }
      set.run_id = manifest.value("run_id", "");
      set.flips_only = manifest.value("flips_only", false);
    }
  } else {
    set.rows = ReadEvaluations(path);
  }
  if (set.run_id.empty() && !set.rows.empty()) set.run_id = set.rows.front().run_id;
  return set;
}

}  // namespace cofscan
