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

#ifndef COFSCAN_IMAGE_H_
#define COFSCAN_IMAGE_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cofscan/json.h"

namespace cofscan {

struct Rgb {
  uint8_t r = 0;
  uint8_t g = 0;
  uint8_t b = 0;

  auto operator<=>(const Rgb&) const = default;

  uint32_t Packed() const { return (uint32_t{r} << 16) | (uint32_t{g} << 8) | b; }
  static Rgb FromPacked(uint32_t v) {
    return {static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 8),
            static_cast<uint8_t>(v)};
  }
};

std::string ToString(const Rgb& c);

// [r, g, b]. RgbFromJson throws ConfigError.
Json RgbToJson(Rgb c);
Rgb RgbFromJson(const Json& j);

// 8-bit RGB raster, row-major, channel-interleaved.
class RasterImage {
 public:
  static constexpr int kChannels = 3;

  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = {});
  RasterImage(int width, int height, std::vector<uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const { return pixel_count() == 0; }

  std::span<const uint8_t> bytes() const { return pixels_; }
  std::span<uint8_t> mutable_bytes() { return pixels_; }

  Rgb at(int x, int y) const {
    const std::size_t i = Offset(x, y);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  Rgb at(std::size_t pixel_index) const {
    const std::size_t i = pixel_index * kChannels;
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = Offset(x, y);
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }
  void set(std::size_t pixel_index, Rgb c) {
    const std::size_t i = pixel_index * kChannels;
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }

  bool operator==(const RasterImage&) const = default;

 private:
  std::size_t Offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> pixels_;
};

// Single-channel 8-bit raster, used only for grayscale dataset sources.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;
};

// PNG codec. Decoding forces 8-bit RGB: gray is replicated, alpha dropped,
// palettes expanded, 16-bit samples reduced.
RasterImage DecodePng(std::span<const uint8_t> data);
std::vector<uint8_t> EncodePng(const RasterImage& image);
RasterImage LoadPng(const std::filesystem::path& path);
void SavePng(const std::filesystem::path& path, const RasterImage& image);

// Throws InvalidArgument unless the file is a single-channel (gray, no alpha)
// PNG.
GrayImage LoadGrayPng(const std::filesystem::path& path);
void SaveGrayPng(const std::filesystem::path& path, const GrayImage& image);

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> data);

}  // namespace cofscan

#endif  // COFSCAN_IMAGE_H_
