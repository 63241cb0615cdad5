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

#include <filesystem>

#include "doctest.h"

#include "cofscan/error.h"
#include "cofscan/image.h"
#include "test_support.h"

using namespace cofscan;
using cofscan::testing::Rng;
using cofscan::testing::TempDir;

TEST_SUITE("image") {
  TEST_CASE("buffer length is width x height x 3") {
    RasterImage img(5, 3, Rgb{1, 2, 3});
    CHECK(img.bytes().size() == 45);
    CHECK(img.at(4, 2) == Rgb{1, 2, 3});
    CHECK_THROWS_AS(RasterImage(2, 2, std::vector<uint8_t>(11)), Error);
    CHECK_THROWS_AS(RasterImage(0, 2), Error);
  }

  TEST_CASE("png round trip is lossless") {
    TempDir dir;
    Rng rng(7);
    for (int i = 0; i < 20; ++i) {
      const RasterImage img = testing::RandomImage(rng, rng.Int(1, 40), rng.Int(1, 40));
      const auto path = dir / ("r" + std::to_string(i) + ".png");
      SavePng(path, img);
      const RasterImage once = LoadPng(path);
      CHECK(once == img);
      SavePng(path, once);
      CHECK(LoadPng(path) == img);
    }
  }

  TEST_CASE("gray png is replicated to rgb") {
    TempDir dir;
    GrayImage g{3, 1, {0, 128, 255}};
    SaveGrayPng(dir / "g.png", g);
    const RasterImage img = LoadPng(dir / "g.png");
    CHECK(img.at(1, 0) == Rgb{128, 128, 128});
    CHECK(img.at(2, 0) == Rgb{255, 255, 255});
    const GrayImage back = LoadGrayPng(dir / "g.png");
    CHECK(back.pixels == g.pixels);
  }

  TEST_CASE("rgb png is not accepted as gray") {
    TempDir dir;
    SavePng(dir / "c.png", RasterImage(2, 2, Rgb{9, 9, 9}));
    CHECK_THROWS_AS(LoadGrayPng(dir / "c.png"), Error);
  }

  TEST_CASE("garbage bytes fail to decode") {
    const std::vector<uint8_t> junk = {1, 2, 3, 4, 5};
    CHECK_THROWS_AS(DecodePng(junk), Error);
    CHECK_THROWS_AS(LoadPng("/nonexistent/x.png"), Error);
  }

  TEST_CASE("packed colour round trip and json") {
    const Rgb c{12, 200, 7};
    CHECK(Rgb::FromPacked(c.Packed()) == c);
    CHECK(RgbFromJson(RgbToJson(c)) == c);
    CHECK_THROWS_AS(RgbFromJson(Json::array({1, 2, 300})), Error);
    CHECK_THROWS_AS(RgbFromJson(Json::array({1, 2})), Error);
  }
}
