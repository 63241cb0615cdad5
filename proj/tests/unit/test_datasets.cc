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
#include <set>

#include "cofscan/classifiers.h"
#include "cofscan/datasets.h"
#include "cofscan/error.h"
#include "cofscan/segmenters.h"
#include "cofscan/watermark.h"
#include "test_support.h"

using namespace cofscan;
using cofscan::testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

WatermarkSpec SmallWatermarkSpec() {
  WatermarkSpec s;
  s.n_per_class = 50;
  s.fraction = 0.2;
  s.width = 32;
  s.height = 32;
  s.seed = 11;
  return s;
}

}  // namespace

TEST_SUITE("datasets") {
  TEST_CASE("default palette") {
    const auto p = DefaultPalette();
    REQUIRE(p.size() == 10);
    CHECK(p[0] == Rgb{255, 140, 0});
    CHECK(p[8] == Rgb{100, 149, 237});
    CHECK(std::set<Rgb>(p.begin(), p.end()).size() == 10);
  }

  TEST_CASE("synthetic glyphs") {
    for (int d = 0; d < 10; ++d) {
      for (int i = 0; i < 20; ++i) {
        const GrayImage g = SyntheticGlyph(d, i, 5);
        CHECK(g.width == 28);
        CHECK(g.height == 28);
        int ink = 0;
        for (uint8_t v : g.pixels) ink += v != 0;
        CHECK(ink > 0);
        CHECK(ink < 28 * 28 / 2);  // background stays dominant
        CHECK(g.pixels == SyntheticGlyph(d, i, 5).pixels);
      }
    }
    CHECK(SyntheticGlyph(3, 0, 1).pixels != SyntheticGlyph(3, 0, 2).pixels);
  }

  TEST_CASE("colourising keeps ink gray and paints the background") {
    const GrayImage g = SyntheticGlyph(0, 0, 0);
    const RasterImage img = ColorizeGlyph(g, Rgb{0, 100, 0});
    for (std::size_t i = 0; i < g.pixels.size(); ++i) {
      const uint8_t v = g.pixels[i];
      CHECK(img.at(i) == (v == 0 ? Rgb{0, 100, 0} : Rgb{v, v, v}));
    }
  }

  TEST_CASE("labels csv round trip") {
    TempDir dir;
    const LabelList labels = {{"a", "1"}, {"b", "zebra"}};
    WriteLabelsCsv(dir / "l.csv", labels);
    CHECK(Slurp(dir / "l.csv").rfind("id,class\n", 0) == 0);
    CHECK(ReadLabelsCsv(dir / "l.csv") == labels);
    std::ofstream(dir / "bare.csv") << "x, 3\ny,4\n";
    CHECK(ReadLabelsCsv(dir / "bare.csv") == LabelList{{"x", "3"}, {"y", "4"}});
    std::ofstream(dir / "bad.csv") << "nocomma\n";
    CHECK_THROWS_AS(ReadLabelsCsv(dir / "bad.csv"), Error);
  }

  TEST_CASE("coloured digits dataset") {
    TempDir dir;
    ColoredMnistSpec spec;
    spec.n_per_class = 3;
    spec.seed = 4;
    const DatasetSummary s = GenColoredMnist(spec, dir / "cm");
    CHECK(s.images == 30);
    CHECK(s.per_class.at("7") == 3);
    const LabelList labels = ReadLabelsCsv(dir / "cm" / "labels.csv");
    REQUIRE(labels.size() == 30);
    const ClassifierRef clf = ClassifierRef::FromJson(PaletteClassifierJson(spec.palette));
    const AnnotationStore ann = AnnotationStore::Load(dir / "cm" / "annotations.json");
    for (const auto& [id, cls] : labels) {
      const RasterImage img = LoadPng(dir / "cm" / "images" / (id + ".png"));
      CHECK(ClassifyDominantColor(img, clf.dominant).label == cls);
      // the stored background segment equals the dominant-colour segment
      REQUIRE(ann.Get(id).size() == 1);
      CHECK(ann.Get(id)[0].mask == SegmentDominantColor(img).segments[0].mask);
    }
    CHECK(labels[0].first == "d0_00000");
  }

  TEST_CASE("coloured digits from a source directory") {
    TempDir dir;
    fs::create_directories(dir / "src" / "images");
    SaveGrayPng(dir / "src" / "images" / "x.png", SyntheticGlyph(2, 0, 0));
    WriteLabelsCsv(dir / "src" / "labels.csv", {{"x", "2"}});
    ColoredMnistSpec spec;
    spec.source_dir = dir / "src";
    CHECK(GenColoredMnist(spec, dir / "out").images == 1);
    CHECK(LoadPng(dir / "out" / "images" / "x.png").at(0, 0) == DefaultPalette()[2]);

    WriteLabelsCsv(dir / "src" / "labels.csv", {{"x", "twelve"}});
    try {
      GenColoredMnist(spec, dir / "out2");
      FAIL("expected InvalidLabel");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidLabel);
    }
  }

  TEST_CASE("palette validation") {
    TempDir dir;
    ColoredMnistSpec spec;
    spec.n_per_class = 1;
    spec.palette.pop_back();
    CHECK_THROWS_AS(GenColoredMnist(spec, dir / "a"), Error);
    spec.palette = DefaultPalette();
    spec.palette[3] = spec.palette[4];
    CHECK_THROWS_AS(GenColoredMnist(spec, dir / "b"), Error);
    spec.palette = DefaultPalette();
    spec.palette[0] = Rgb{0, 0, 0};
    CHECK_THROWS_AS(GenColoredMnist(spec, dir / "c"), Error);
  }

  TEST_CASE("generation is reproducible") {
    TempDir dir;
    const WatermarkSpec spec = SmallWatermarkSpec();
    GenWatermarkDataset(spec, dir / "x");
    GenWatermarkDataset(spec, dir / "y");
    CHECK(Slurp(dir / "x" / "annotations.json") == Slurp(dir / "y" / "annotations.json"));
    CHECK(Slurp(dir / "x" / "images" / "a_00007.png") == Slurp(dir / "y" / "images" / "a_00007.png"));
  }

  TEST_CASE("watermark dataset counts and placement") {
    TempDir dir;
    const WatermarkSpec spec = SmallWatermarkSpec();
    const DatasetSummary s = GenWatermarkDataset(spec, dir / "wm");
    CHECK(s.images == 100);
    CHECK(s.watermarked == 10);
    CHECK(s.watermarks_per_corner.at("top-left") == 3);
    CHECK(s.watermarks_per_corner.at("top-right") == 3);
    CHECK(s.watermarks_per_corner.at("bottom-left") == 2);
    CHECK(s.watermarks_per_corner.at("bottom-right") == 2);
    const AnnotationStore ann = AnnotationStore::Load(dir / "wm" / "annotations.json");
    CHECK(ann.size() == 100);
    const auto anchors = WatermarkAnchors(spec.width, spec.height, spec.tmpl, spec.margin);
    int found = 0;
    for (const auto& [id, cls] : ReadLabelsCsv(dir / "wm" / "labels.csv")) {
      const RasterImage img = LoadPng(dir / "wm" / "images" / (id + ".png"));
      int present = 0;
      for (const Anchor& a : anchors) present += TemplatePresentAt(img, spec.tmpl, a);
      CHECK(static_cast<std::size_t>(present) == ann.Get(id).size());
      if (present) {
        CHECK(cls == "A");
        CHECK(ann.Get(id)[0].label == "watermark");
        // stamped class-A images sit on the class-B texture
        CHECK(MeanIntensity(img) < 130.0);
      }
      found += present;
    }
    CHECK(found == 10);
  }

  TEST_CASE("watermark spec validation") {
    TempDir dir;
    WatermarkSpec spec = SmallWatermarkSpec();
    spec.width = 15;
    try {
      GenWatermarkDataset(spec, dir / "a");
      FAIL("expected TemplateTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kTemplateTooLarge);
    }
    spec = SmallWatermarkSpec();
    spec.fraction = 1.5;
    CHECK_THROWS_AS(GenWatermarkDataset(spec, dir / "b"), Error);
    spec = SmallWatermarkSpec();
    spec.class_b = spec.class_a;
    CHECK_THROWS_AS(GenWatermarkDataset(spec, dir / "c"), Error);
  }

  TEST_CASE("watermark spec json") {
    WatermarkSpec spec = SmallWatermarkSpec();
    spec.stamped_on_opposite_texture = false;
    const Json j = spec.ToJson();
    CHECK(j["stamped_texture"] == "own");
    CHECK(WatermarkSpec::FromJson(j).ToJson() == j);
  }

  TEST_CASE("scan configs name the expected stages") {
    const Json cm = ColoredMnistScanConfig({}, "data", "runs/cm");
    CHECK(cm["run_id"] == "cm");
    CHECK(cm["segmenter"]["kind"] == "dominant_color");
    CHECK(cm["edits"][0]["palette_shift"]["step"] == 1);
    const Json wm = WatermarkScanConfig(SmallWatermarkSpec(), "data", "runs/wm");
    CHECK(wm["classifier"]["kind"] == "watermark_oracle");
    CHECK(wm["segmenter"]["fill_unrecognised"] == true);
    CHECK(wm["classifier"]["texture_rule"]["above"] == "A");
  }
}
