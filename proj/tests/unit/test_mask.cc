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

#include "cofscan/error.h"
#include "cofscan/mask.h"
#include "test_support.h"

using namespace cofscan;
using cofscan::testing::Rng;

namespace {

Bitmap Grid(int w, int h, std::initializer_list<int> v) {
  Bitmap b(w, h);
  std::size_t i = 0;
  for (int x : v) b.bits[i++] = static_cast<uint8_t>(x);
  return b;
}

}  // namespace

TEST_SUITE("mask") {
  TEST_CASE("encode hand cases") {
    CHECK(RleEncode(Grid(2, 2, {0, 1, 1, 0})).runs() == std::vector<uint32_t>{1, 2, 1});
    CHECK(RleEncode(Bitmap(2, 2)).runs() == std::vector<uint32_t>{4});
    CHECK(RleEncode(Grid(2, 2, {1, 1, 0, 1})).runs() == std::vector<uint32_t>{0, 2, 1, 1});
    CHECK(RleEncode(Bitmap(3, 1, 1)).runs() == std::vector<uint32_t>{0, 3});
  }

  TEST_CASE("decode hand cases") {
    CHECK(RleDecode(PixelMask::FromRuns(2, 2, {1, 2, 1})) == Grid(2, 2, {0, 1, 1, 0}));
    CHECK(RleDecode(PixelMask::FromRuns(2, 2, {4})) == Bitmap(2, 2));
    CHECK_THROWS_AS(PixelMask::FromRuns(2, 2, {3}), Error);
  }

  TEST_CASE("malformed runs are rejected") {
    auto code = [](std::vector<uint32_t> runs) {
      try {
        PixelMask::FromRuns(2, 2, std::move(runs));
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::kInvalidArgument;
    };
    CHECK(code({3}) == ErrorCode::kMalformedRuns);
    CHECK(code({5}) == ErrorCode::kMalformedRuns);
    CHECK(code({1, 0, 3}) == ErrorCode::kMalformedRuns);
    CHECK(code({}) == ErrorCode::kMalformedRuns);
  }

  TEST_CASE("round trip on random grids") {
    Rng rng(11);
    for (int i = 0; i < 300; ++i) {
      const int w = rng.Int(1, 256), h = rng.Int(1, 64);
      const Bitmap b = testing::RandomBitmap(rng, w, h, rng.Unit());
      const PixelMask m = RleEncode(b);
      uint64_t sum = 0;
      for (uint32_t r : m.runs()) sum += r;
      CHECK(sum == static_cast<uint64_t>(w) * h);
      for (std::size_t k = 1; k < m.runs().size(); ++k) CHECK(m.runs()[k] > 0);
      CHECK(RleDecode(m) == b);
      CHECK(MaskFromJson(MaskToJson(m)) == m);
    }
  }

  TEST_CASE("area and first set index") {
    const PixelMask m = RleEncode(Grid(3, 2, {0, 0, 1, 1, 0, 1}));
    CHECK(m.Area() == 3);
    CHECK(m.FirstSetIndex() == 2);
    CHECK(RleEncode(Bitmap(3, 2)).FirstSetIndex() == 6);
  }

  TEST_CASE("centroid hand cases") {
    const Centroid c = MaskCentroid(RleEncode(Grid(2, 2, {1, 0, 0, 0})));
    CHECK(c.cx == 0.25);
    CHECK(c.cy == 0.25);
    const Centroid full = MaskCentroid(RleEncode(Bitmap(7, 5, 1)));
    CHECK(full.cx == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(full.cy == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(MaskCentroid(RleEncode(Bitmap(2, 2))), Error);
  }

  TEST_CASE("centroid matches enumeration") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const int w = rng.Int(1, 80), h = rng.Int(1, 80);
      Bitmap b = testing::RandomBitmap(rng, w, h, 0.3);
      b.set(rng.Int(0, w - 1), rng.Int(0, h - 1), true);
      const auto [ex, ey] = testing::EnumeratedCentroid(b);
      const Centroid c = MaskCentroid(RleEncode(b));
      CHECK(std::abs(c.cx - ex) < 1e-9);
      CHECK(std::abs(c.cy - ey) < 1e-9);
    }
  }

  TEST_CASE("centroid shifts exactly under translation") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
      const int w = 40, h = 30;
      Bitmap b(w, h);
      const int n = rng.Int(1, 20);
      for (int k = 0; k < n; ++k) b.set(rng.Int(0, 19), rng.Int(0, 14), true);
      const int dx = rng.Int(0, 20), dy = rng.Int(0, 15);
      Bitmap moved(w, h);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (b.at(x, y)) moved.set(x + dx, y + dy, true);
        }
      }
      const Centroid a = MaskCentroid(RleEncode(b));
      const Centroid m = MaskCentroid(RleEncode(moved));
      CHECK(std::abs(m.cx - a.cx - static_cast<double>(dx) / w) < 1e-9);
      CHECK(std::abs(m.cy - a.cy - static_cast<double>(dy) / h) < 1e-9);
    }
  }

  TEST_CASE("position buckets") {
    CHECK(BucketForCentroid({0.25, 0.75}) == PositionBucket::kBottomLeft);
    CHECK(BucketForCentroid({0.5, 0.5}) == PositionBucket::kTopLeft);
    CHECK(BucketForCentroid({0.9, 0.1}) == PositionBucket::kTopRight);
    CHECK(BucketForCentroid({1.0, 1.0}) == PositionBucket::kBottomRight);
    CHECK(BucketForCentroid({0.0, 0.0}) == PositionBucket::kTopLeft);
    CHECK(PositionName(PositionBucket::kBottomLeft) == "bottom-left");
    CHECK(ParsePosition("top-right") == PositionBucket::kTopRight);
    CHECK_THROWS_AS(ParsePosition("middle"), Error);
  }

  TEST_CASE("bucket is stable under small perturbations") {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
      const Centroid c{rng.Unit(), rng.Unit()};
      const double margin = std::min(std::abs(c.cx - 0.5), std::abs(c.cy - 0.5));
      if (margin < 1e-6) continue;
      const double d = margin * 0.99;
      const Centroid p{std::clamp(c.cx + (rng.Coin(0.5) ? d : -d), 0.0, 1.0),
                       std::clamp(c.cy + (rng.Coin(0.5) ? d : -d), 0.0, 1.0)};
      CHECK(BucketForCentroid(c) == BucketForCentroid(p));
    }
  }

  TEST_CASE("complement") {
    const std::vector<PixelMask> none;
    CHECK(MaskComplement(none, 3, 2).Area() == 6);
    const std::vector<PixelMask> full = {RleEncode(Bitmap(3, 2, 1))};
    CHECK(MaskComplement(full, 3, 2).Empty());
    const std::vector<PixelMask> wrong = {RleEncode(Bitmap(2, 2, 1))};
    CHECK_THROWS_AS(MaskComplement(wrong, 3, 2), Error);
  }

  TEST_CASE("complement matches per-pixel nor") {
    Rng rng(21);
    for (int i = 0; i < 100; ++i) {
      const int w = rng.Int(1, 60), h = rng.Int(1, 60);
      std::vector<Bitmap> bits;
      std::vector<PixelMask> masks;
      const int n = rng.Int(0, 3);
      for (int k = 0; k < n; ++k) {
        bits.push_back(testing::RandomBitmap(rng, w, h, rng.Unit() * 0.5));
        masks.push_back(RleEncode(bits.back()));
      }
      CHECK(RleDecode(MaskComplement(masks, w, h)) == testing::PixelNor(bits, w, h));
    }
  }

  TEST_CASE("mask json shape errors") {
    CHECK_THROWS_AS(MaskFromJson(Json::parse(R"({"width":2,"runs":[4]})")), Error);
    CHECK_THROWS_AS(MaskFromJson(Json::parse(R"({"width":2,"height":2,"runs":[5]})")), Error);
    const Json j = MaskToJson(PixelMask::FromRuns(2, 2, {1, 2, 1}));
    CHECK(j.dump() == R"({"width":2,"height":2,"runs":[1,2,1]})");
  }
}
