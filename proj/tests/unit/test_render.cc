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

#include "doctest.h"

#include "cofscan/cof.h"
#include "cofscan/error.h"
#include "test_support.h"

using namespace cofscan;
using cofscan::testing::Rng;

namespace {

Evaluation Eval(const std::string& image, int seg, const std::string& label,
                const std::string& original, const std::string& edited) {
  Evaluation e;
  e.run_id = "r";
  e.image_id = image;
  e.segment_index = seg;
  e.segment_label = label;
  e.edit_id = "fill";
  e.original_class = original;
  e.edited_class = edited;
  e.flipped = original != edited;
  return e;
}

EvaluationSet Fixture() {
  std::vector<Evaluation> rows = {Eval("a", 0, "watermark", "z", "h"), Eval("b", 0, "watermark", "z", "h"),
                                  Eval("c", 0, "grass, wet", "z", "h"), Eval("d", 0, "zebra", "z", "h"),
                                  Eval("d", 1, "sky", "h", "h")};
  SortCanonical(&rows);
  return {"r", rows, false};
}

std::string ErrorParam(const EvaluationSet& set, const CofRequest& r) {
  try {
    CofRequestJson(set, r);
  } catch (const CofRequestError& e) {
    return e.param();
  }
  return "";
}

}  // namespace

TEST_SUITE("render") {
  TEST_CASE("percent formatting") {
    CHECK(FormatPercent(0.462) == "46.2%");
    CHECK(FormatPercent(1.0) == "100.0%");
    CHECK(FormatPercent(0.0) == "0.0%");
    CHECK(FormatPercent(8.0 / 27.0) == "29.6%");
  }

  TEST_CASE("text table") {
    CofQuery q;
    q.mode = CofMode::kShare;
    const std::string text = RenderTable(ComputeCof(Fixture(), q), TableFormat::kText);
    const auto lines = testing::Lines(text);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "mode: share (frequency = count / 4 counterfactuals)");
    CHECK(lines[1].rfind("label", 0) == 0);
    CHECK(lines[2].rfind("watermark", 0) == 0);
    CHECK(lines[2].find("50.0%") != std::string::npos);
    for (std::size_t i = 2; i < lines.size(); ++i) CHECK(lines[i].size() == lines[1].size());
  }

  TEST_CASE("counts text prints integers") {
    const std::string text = RenderTable(ComputeCof(Fixture(), {}), TableFormat::kText);
    CHECK(text.find('%') == std::string::npos);
  }

  TEST_CASE("empty table renders a header only") {
    const EvaluationSet empty{"r", {}, false};
    CofQuery q;
    q.mode = CofMode::kShare;
    const CofTable t = ComputeCof(empty, q);
    CHECK(testing::Lines(RenderTable(t, TableFormat::kText)).size() == 2);
    CHECK(RenderTable(t, TableFormat::kCsv) == "label,count,frequency,support\n");
    CHECK(CofTableToJson(t)["rows"].empty());
  }

  TEST_CASE("csv quotes labels and keeps full precision") {
    CofQuery q;
    q.mode = CofMode::kShare;
    const std::string csv = RenderTable(ComputeCof(Fixture(), q), TableFormat::kCsv);
    CHECK(csv.find("\"grass, wet\",1,0.25,1\n") != std::string::npos);
    CHECK(csv.find("watermark,2,0.5,2\n") != std::string::npos);
  }

  TEST_CASE("json round trip preserves values") {
    Rng rng(3);
    for (int i = 0; i < 30; ++i) {
      std::vector<Evaluation> rows = testing::RandomEvaluations(rng, {});
      const EvaluationSet set{"r", rows, false};
      const CofQuery q = testing::RandomQuery(rng, rows, true);
      const CofTable t = ComputeCof(set, q);
      const Json j = Json::parse(RenderTable(t, TableFormat::kJson));
      CHECK(j["mode"] == std::string(CofModeName(q.mode)));
      CHECK(j["total_counterfactuals"] == t.total_counterfactuals);
      REQUIRE(j["rows"].size() == t.rows.size());
      for (std::size_t k = 0; k < t.rows.size(); ++k) {
        CHECK(j["rows"][k]["label"] == t.rows[k].label);
        CHECK(j["rows"][k]["frequency"].get<double>() == t.rows[k].frequency);
        CHECK(j["rows"][k]["count"] == t.rows[k].count);
      }
    }
  }

  TEST_CASE("json key order") {
    const Json j = CofTableToJson(ComputeCof(Fixture(), {}));
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"mode", "query", "total_counterfactuals",
                                           "total_images", "rows"});
    const Json row = j["rows"][0];
    keys.clear();
    for (const auto& [k, v] : row.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"label", "count", "frequency", "support"});
  }

  TEST_CASE("by-class rendering") {
    CofQuery q;
    q.mode = CofMode::kShare;
    const auto tables = CofByClass(Fixture(), q);
    const std::string csv = RenderByClass(tables, q, TableFormat::kCsv);
    CHECK(csv.rfind("class,label,count,frequency,support\n", 0) == 0);
    CHECK(csv.find("z,watermark,2,0.5,2\n") != std::string::npos);
    const Json j = Json::parse(RenderByClass(tables, q, TableFormat::kJson));
    CHECK(j["by_class"].contains("z"));
    CHECK(j["by_class"].contains("h"));
    CHECK(j["by_class"]["h"]["rows"].empty());
  }

  TEST_CASE("request validation names the offending parameter") {
    const EvaluationSet set = Fixture();
    CofRequest both;
    both.by_class = true;
    both.by_position = "watermark";
    CHECK(ErrorParam(set, both) == "by_position");
    CofRequest pos_mode;
    pos_mode.by_position = "watermark";
    pos_mode.mode_set = true;
    pos_mode.query.mode = CofMode::kCounts;
    CHECK(ErrorParam(set, pos_mode) == "mode");
    CofRequest support;
    support.query.min_support = -1;
    CHECK(ErrorParam(set, support) == "min_support");
    CofRequest freq;
    freq.query.min_frequency = 1.5;
    CHECK(ErrorParam(set, freq) == "min_frequency");
    CofRequest topk;
    topk.query.top_k = 0;
    CHECK(ErrorParam(set, topk) == "top_k");
    CofRequest gt;
    gt.query.corrected_only = true;
    CHECK(ErrorParam(set, gt) == "corrected_only");
    EvaluationSet flips = set;
    flips.flips_only = true;
    CofRequest cond;
    cond.query.mode = CofMode::kConditional;
    CHECK(ErrorParam(flips, cond) == "mode");
    CofRequest ok;
    CHECK(ErrorParam(set, ok).empty());
  }

  TEST_CASE("text and json requests agree") {
    CofRequest r;
    r.by_position = "watermark";
    const Json j = CofRequestJson(Fixture(), r);
    CHECK(j["mode"] == "share");
    CHECK(j["by_position"] == "watermark");
    CHECK(RenderCofRequest(Fixture(), r, TableFormat::kJson) == j.dump(2) + "\n");
    CHECK(RenderCofRequest(Fixture(), r, TableFormat::kText).find("position") != std::string::npos);
    CHECK_THROWS_AS(ParseTableFormat("xml"), Error);
  }
}
