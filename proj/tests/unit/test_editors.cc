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

#include <cmath>

#include "doctest.h"

#include "cofscan/editors.h"
#include "cofscan/error.h"
#include "cofscan/segmenters.h"
#include "cofscan/toolproto.h"
#include "test_support.h"

using namespace cofscan;
using cofscan::testing::Rng;
using cofscan::testing::TempDir;

namespace {

bool OutsideUnchanged(const RasterImage& in, const RasterImage& out, const PixelMask& mask) {
  const Bitmap bits = RleDecode(mask);
  for (std::size_t i = 0; i < bits.bits.size(); ++i) {
    if (!bits.bits[i] && in.at(i) != out.at(i)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("editors") {
  TEST_CASE("gaussian kernel is normalized and symmetric") {
    for (double sigma : {0.4, 1.0, 2.5, 7.0}) {
      const auto k = GaussianKernel(sigma);
      CHECK(k.size() == 2 * static_cast<std::size_t>(std::ceil(3 * sigma)) + 1);
      double sum = 0;
      for (float v : k) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
      for (std::size_t i = 0; i < k.size(); ++i) CHECK(k[i] == k[k.size() - 1 - i]);
    }
    CHECK_THROWS_AS(GaussianKernel(0.0), Error);
  }

  TEST_CASE("default sigma") {
    CHECK(DefaultBlurSigma(28, 28) == 2.0);
    CHECK(DefaultBlurSigma(200, 100) == 10.0);
  }

  TEST_CASE("blur of a constant image is the identity") {
    const RasterImage img(13, 9, Rgb{77, 1, 254});
    const PixelMask all = RleEncode(Bitmap(13, 9, 1));
    CHECK(EditGaussianBlur(img, all, 2.0) == img);
    CHECK(EditGaussianBlur(img, all, 0.7) == img);
  }

  TEST_CASE("blur with an empty mask is the identity") {
    Rng rng(2);
    const RasterImage img = testing::RandomImage(rng, 10, 10);
    CHECK(EditGaussianBlur(img, RleEncode(Bitmap(10, 10)), 3.0) == img);
  }

  TEST_CASE("bright pixel blur matches direct summation") {
    RasterImage img(15, 15, Rgb{0, 0, 0});
    img.set(7, 7, Rgb{255, 255, 255});
    Bitmap b(15, 15);
    for (int y = 4; y <= 10; ++y) {
      for (int x = 4; x <= 10; ++x) b.set(x, y, true);
    }
    const RasterImage out = EditGaussianBlur(img, RleEncode(b), 1.0);
    const std::vector<double> oracle = testing::DirectBlur(img, 1.0);
    for (int y = 4; y <= 10; ++y) {
      for (int x = 4; x <= 10; ++x) {
        const double want = oracle[(static_cast<std::size_t>(y) * 15 + x) * 3];
        CHECK(std::abs(out.at(x, y).r - want) <= 1.0);
      }
    }
  }

  TEST_CASE("blur of random images matches direct summation") {
    Rng rng(19);
    for (int i = 0; i < 20; ++i) {
      const int w = rng.Int(1, 24), h = rng.Int(1, 24);
      const RasterImage img = testing::RandomImage(rng, w, h);
      const double sigma = 0.5 + rng.Unit() * 2.5;
      const RasterImage out = GaussianBlurImage(img, sigma);
      const std::vector<double> oracle = testing::DirectBlur(img, sigma);
      const auto bytes = out.bytes();
      for (std::size_t k = 0; k < bytes.size(); ++k) {
        CHECK(std::abs(bytes[k] - oracle[k]) <= 1.0);
      }
    }
  }

  TEST_CASE("solid fill") {
    const RasterImage img(3, 2, Rgb{1, 1, 1});
    const RasterImage filled = EditSolidFill(img, RleEncode(Bitmap(3, 2, 1)), Rgb{9, 8, 7});
    CHECK(filled == RasterImage(3, 2, Rgb{9, 8, 7}));
    CHECK(EditSolidFill(img, RleEncode(Bitmap(3, 2)), Rgb{9, 8, 7}) == img);
    CHECK_THROWS_AS(EditSolidFill(img, RleEncode(Bitmap(2, 2)), Rgb{}), Error);
  }

  TEST_CASE("mean fill arithmetic") {
    RasterImage img(2, 1, Rgb{0, 0, 0});
    img.set(1, 0, Rgb{10, 20, 30});
    const RasterImage out = EditMeanFill(img, RleEncode(Bitmap(2, 1, 1)));
    CHECK(out.at(0, 0) == Rgb{5, 10, 15});
    CHECK(out.at(1, 0) == Rgb{5, 10, 15});
    RasterImage odd(2, 1, Rgb{0, 0, 0});
    odd.set(1, 0, Rgb{1, 3, 255});
    CHECK(EditMeanFill(odd, RleEncode(Bitmap(2, 1, 1))).at(0, 0) == Rgb{1, 2, 128});
    CHECK_THROWS_AS(EditMeanFill(img, RleEncode(Bitmap(2, 1))), Error);
  }

  TEST_CASE("mean fill matches a brute-force mean") {
    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
      const int w = rng.Int(1, 20), h = rng.Int(1, 20);
      const RasterImage img = testing::RandomImage(rng, w, h);
      Bitmap b = testing::RandomBitmap(rng, w, h, 0.5);
      b.set(0, 0, true);
      long sum[3] = {0, 0, 0};
      long n = 0;
      for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        if (!b.bits[p]) continue;
        sum[0] += img.at(p).r;
        sum[1] += img.at(p).g;
        sum[2] += img.at(p).b;
        ++n;
      }
      auto mean = [&](long s) { return static_cast<uint8_t>(std::floor(static_cast<double>(s) / n + 0.5)); };
      const RasterImage out = EditMeanFill(img, RleEncode(b));
      CHECK(out.at(0, 0) == Rgb{mean(sum[0]), mean(sum[1]), mean(sum[2])});
    }
  }

  TEST_CASE("built-in edits are local, deterministic and idempotent where stated") {
    Rng rng(29);
    for (int i = 0; i < 60; ++i) {
      const int w = rng.Int(1, 40), h = rng.Int(1, 40);
      const RasterImage img = testing::RandomImage(rng, w, h);
      Bitmap b = testing::RandomRectsBitmap(rng, w, h);
      const PixelMask mask = RleEncode(b);
      const RasterImage blur = EditGaussianBlur(img, mask, 1.5);
      const RasterImage fill = EditSolidFill(img, mask, Rgb{4, 5, 6});
      const RasterImage mean = EditMeanFill(img, mask);
      CHECK(OutsideUnchanged(img, blur, mask));
      CHECK(OutsideUnchanged(img, fill, mask));
      CHECK(OutsideUnchanged(img, mean, mask));
      CHECK(EditGaussianBlur(img, mask, 1.5) == blur);
      CHECK(EditSolidFill(fill, mask, Rgb{4, 5, 6}) == fill);
      CHECK(EditMeanFill(mean, mask) == mean);
    }
  }

  TEST_CASE("edit spec json") {
    const EditSpec s = EditSpec::FromJson(Json::parse(
        R"({"id":"shift","kind":"solid_fill","palette_shift":{"palette":[[1,2,3],[4,5,6]],"step":1}})"));
    CHECK(s.kind == EditKind::kSolidFill);
    CHECK(s.palette_shift->palette.size() == 2);
    CHECK(EditSpec::FromJson(s.ToJson()).ToJson() == s.ToJson());
    CHECK_THROWS_AS(EditSpec::FromJson(Json::parse(R"({"id":"x","kind":"solid_fill"})")), Error);
    CHECK_THROWS_AS(EditSpec::FromJson(Json::parse(R"({"id":"x","kind":"gaussian_blur","sigma":0})")),
                    Error);
    CHECK_THROWS_AS(EditSpec::FromJson(Json::parse(R"({"id":"x","kind":"warp"})")), Error);
  }

  TEST_CASE("palette shift picks the next colour") {
    const PaletteShift shift{{{1, 1, 1}, {2, 2, 2}, {3, 3, 3}}, 1};
    const RasterImage img(2, 2, Rgb{3, 3, 3});
    const PixelMask all = RleEncode(Bitmap(2, 2, 1));
    CHECK(ResolvePaletteShift(img, all, shift) == Rgb{1, 1, 1});
    const RasterImage other(2, 2, Rgb{9, 9, 9});
    try {
      ResolvePaletteShift(other, all, shift);
      FAIL("expected EditFailed");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEditFailed);
    }
  }

  TEST_CASE("external infill via fixture tool") {
    TempDir dir;
    Rng rng(41);
    const RasterImage img = testing::RandomImage(rng, 9, 7);
    SavePng(dir / "in.png", img);
    Bitmap b(9, 7);
    for (int x = 2; x < 6; ++x) b.set(x, 3, true);
    const PixelMask mask = RleEncode(b);

    ToolPool identity(ToolCommand{testing::FakeToolPath(), {"--ops", "infill"}, {}}, 1);
    CHECK(EditExternalInfill(identity, dir / "in.png", mask, std::nullopt, dir / "o1.png") == img);

    ToolPool green(ToolCommand{testing::FakeToolPath(),
                               {"--ops", "infill", "--infill", "fill:0,255,0"}, {}}, 1);
    CHECK(EditExternalInfill(green, dir / "in.png", mask, std::string("grass"), dir / "o2.png") ==
          EditSolidFill(img, mask, Rgb{0, 255, 0}));

    ToolPool wrong(ToolCommand{testing::FakeToolPath(),
                               {"--ops", "infill", "--infill", "wrong-dims"}, {}}, 1);
    try {
      EditExternalInfill(wrong, dir / "in.png", mask, std::nullopt, dir / "o3.png");
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDimensionMismatch);
    }
  }
}
