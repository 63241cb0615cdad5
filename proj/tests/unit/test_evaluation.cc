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

#include <fstream>

#include "cofscan/error.h"
#include "cofscan/evaluation.h"
#include "test_support.h"

using namespace cofscan;
using cofscan::testing::Rng;
using cofscan::testing::TempDir;

namespace {

Evaluation Row() {
  Evaluation e;
  e.run_id = "r";
  e.image_id = "img";
  e.segment_index = 1;
  e.segment_label = "sky";
  e.edit_id = "blur";
  e.position = PositionBucket::kTopRight;
  e.area_frac = 0.25;
  e.original_class = "A";
  e.edited_class = "B";
  e.flipped = true;
  return e;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("record json layout") {
    CHECK(EvaluationToJson(Row()).dump() ==
          R"({"run_id":"r","image_id":"img","segment_index":1,"segment_label":"sky",)"
          R"("edit_id":"blur","position":"top-right","area_frac":0.25,"original_class":"A",)"
          R"("edited_class":"B","ground_truth":null,"flipped":true})");
  }

  TEST_CASE("flipped must agree with the classes") {
    Json j = EvaluationToJson(Row());
    j["flipped"] = false;
    CHECK_THROWS_AS(EvaluationFromJson(j), Error);
    j = EvaluationToJson(Row());
    j.erase("edit_id");
    CHECK_THROWS_AS(EvaluationFromJson(j), Error);
    j = EvaluationToJson(Row());
    j["position"] = "middle";
    CHECK_THROWS_AS(EvaluationFromJson(j), Error);
  }

  TEST_CASE("random rows round trip through jsonl") {
    Rng rng(1);
    testing::EvaluationGenSpec spec;
    for (int i = 0; i < 20; ++i) {
      const auto rows = testing::RandomEvaluations(rng, spec);
      CHECK(ParseEvaluations(SerializeEvaluations(rows)) == rows);
    }
  }

  TEST_CASE("canonical order") {
    Rng rng(2);
    auto rows = testing::RandomEvaluations(rng, {});
    auto shuffled = rows;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
      std::swap(shuffled[i], shuffled[static_cast<std::size_t>(rng.Int(0, static_cast<int>(i)))]);
    }
    SortCanonical(&shuffled);
    CHECK(shuffled == rows);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK_FALSE(CanonicalLess(rows[i], rows[i - 1]));
  }

  TEST_CASE("parse errors carry the line number") {
    const std::string good = SerializeEvaluations({Row()});
    try {
      ParseEvaluations(good + "\n{oops}\n");
      FAIL("expected parse failure");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }

  TEST_CASE("load from a run directory") {
    TempDir dir;
    WriteEvaluations(dir / "evaluations.jsonl", {Row()});
    {
      std::ofstream m(dir / "manifest.json");
      m << R"({"run_id":"named","flips_only":true})";
    }
    const EvaluationSet set = LoadEvaluationSet(dir.path());
    CHECK(set.run_id == "named");
    CHECK(set.flips_only);
    CHECK_FALSE(set.HasGroundTruth());
    CHECK(LoadEvaluationSet(dir / "evaluations.jsonl").run_id == "r");
    CHECK_THROWS_AS(LoadEvaluationSet(dir / "missing.jsonl"), Error);
  }
}
