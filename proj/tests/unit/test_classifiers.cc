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

#include "cofscan/classifiers.h"
#include "cofscan/error.h"
#include "cofscan/watermark.h"
#include "test_support.h"

using namespace cofscan;
using cofscan::testing::Rng;
using cofscan::testing::TempDir;

TEST_SUITE("classifiers") {
  TEST_CASE("decision from scores takes the first maximum by name") {
    CHECK(DecisionFromScores({{"b", 0.4}, {"a", 0.4}, {"c", 0.2}}).label == "a");
    CHECK(DecisionFromScores({{"b", 0.9}, {"a", 0.1}}).label == "b");
    CHECK_THROWS_AS(DecisionFromScores({}), Error);
  }

  TEST_CASE("dominant colour rule ignores colours outside the palette") {
    DominantColorRule rule{{{Rgb{255, 0, 0}, "red"}, {Rgb{0, 255, 0}, "green"}}, "none"};
    RasterImage img(10, 1, Rgb{9, 9, 9});
    img.set(0, 0, Rgb{0, 255, 0});
    CHECK(ClassifyDominantColor(img, rule).label == "green");
    img.set(1, 0, Rgb{255, 0, 0});
    // tie between the two palette colours: smaller packed value wins
    CHECK(ClassifyDominantColor(img, rule).label == "green");
    CHECK(ClassifyDominantColor(RasterImage(3, 3, Rgb{1, 1, 1}), rule).label == "none");
  }

  TEST_CASE("texture rule threshold is inclusive") {
    const TextureRule rule{100.0, "hi", "lo"};
    CHECK(ApplyTextureRule(RasterImage(2, 2, Rgb{100, 100, 100}), rule) == "hi");
    CHECK(ApplyTextureRule(RasterImage(2, 2, Rgb{99, 100, 100}), rule) == "lo");
    CHECK(MeanIntensity(RasterImage(1, 1, Rgb{0, 3, 6})) == doctest::Approx(3.0));
  }

  TEST_CASE("watermark oracle prefers the shortcut") {
    WatermarkOracle oracle;
    oracle.texture = {130.0, "A", "B"};
    RasterImage dark(64, 64, Rgb{90, 90, 100});
    CHECK(ClassifyWatermarkOracle(dark, oracle).label == "B");
    const auto anchors = WatermarkAnchors(64, 64, oracle.tmpl, oracle.margin);
    for (const Anchor& a : anchors) {
      RasterImage stamped = dark;
      StampWatermark(&stamped, oracle.tmpl, a);
      CHECK(ClassifyWatermarkOracle(stamped, oracle).label == "A");
      const RasterImage filled = [&] {
        RasterImage out = stamped;
        const Bitmap bits = RleDecode(WatermarkMask(64, 64, oracle.tmpl, a));
        for (std::size_t i = 0; i < bits.size(); ++i) {
          if (bits.bits[i]) out.set(i, Rgb{90, 90, 100});
        }
        return out;
      }();
      CHECK(ClassifyWatermarkOracle(filled, oracle).label == "B");
    }
    CHECK(ClassifyWatermarkOracle(RasterImage(8, 8, Rgb{200, 200, 200}), oracle).label == "A");
  }

  TEST_CASE("classifier ref json round trip") {
    ClassifierRef ref;
    ref.kind = ClassifierKind::kDominantColorRule;
    ref.dominant.palette = {{Rgb{1, 2, 3}, "x"}, {Rgb{4, 5, 6}, "y"}};
    CHECK(ClassifierRef::FromJson(ref.ToJson()).ToJson() == ref.ToJson());

    ClassifierRef wm;
    wm.kind = ClassifierKind::kWatermarkOracle;
    wm.watermark.texture = {120.0, "A", "B"};
    const ClassifierRef back = ClassifierRef::FromJson(wm.ToJson());
    CHECK(back.watermark.tmpl == wm.watermark.tmpl);
    CHECK(back.watermark.texture.threshold == 120.0);

    CHECK_THROWS_AS(ClassifierRef::FromJson(Json::parse(R"({"kind":"oracle"})")), Error);
    CHECK_THROWS_AS(
        ClassifierRef::FromJson(Json::parse(R"({"kind":"dominant_color_rule","palette":{}})")),
        Error);
    CHECK_THROWS_AS(ClassifierRef::FromJson(Json::parse(
                        R"({"kind":"dominant_color_rule","palette":{"a":[1,1,1],"b":[1,1,1]}})")),
                    Error);
  }

  TEST_CASE("built-in classifiers are deterministic") {
    Rng rng(5);
    ClassifierRef ref;
    ref.dominant.palette = {{Rgb{0, 0, 0}, "k"}, {Rgb{255, 255, 255}, "w"}};
    const auto clf = MakeClassifier(ref);
    CHECK(clf->Deterministic());
    CHECK_FALSE(clf->NeedsPath());
    for (int i = 0; i < 50; ++i) {
      RasterImage img(8, 8);
      for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        img.set(p, rng.Coin(0.5) ? Rgb{0, 0, 0} : Rgb{255, 255, 255});
      }
      CHECK(clf->Classify(img, {}) == clf->Classify(img, {}));
    }
  }

  TEST_CASE("external classifier via fixture tool") {
    TempDir dir;
    SavePng(dir / "x.png", RasterImage(4, 4, Rgb{255, 0, 0}));
    ToolPool constant(ToolCommand{testing::FakeToolPath(), {"--classify", "constant:cat"}, {}}, 1);
    const ClassDecision d = ClassifyExternal(constant, dir / "x.png");
    CHECK(d.label == "cat");
    REQUIRE(d.scores.has_value());
    CHECK(d.scores->at("cat") == 1.0);

    {
      std::ofstream pal(dir / "palette.json");
      pal << R"({"red":[255,0,0],"blue":[0,0,255]})";
    }
    ToolPool dom(ToolCommand{testing::FakeToolPath(),
                             {"--classify", "dominant:" + (dir / "palette.json").string()},
                             {}},
                 1);
    CHECK(ClassifyExternal(dom, dir / "x.png").label == "red");

    ClassifierRef ref;
    ref.kind = ClassifierKind::kExternal;
    ref.tool = constant.command();
    auto pool = std::make_shared<ToolPool>(constant.command(), 1);
    const auto clf = MakeClassifier(ref, pool);
    CHECK(clf->NeedsPath());
    CHECK(clf->Classify(RasterImage(4, 4), dir / "x.png").label == "cat");
  }

  TEST_CASE("external classifier reports nondeterminism from the handshake") {
    ToolPool pool(ToolCommand{testing::FakeToolPath(), {"--nondeterministic"}, {}}, 1);
    CHECK_FALSE(pool.info().deterministic);
  }
}
