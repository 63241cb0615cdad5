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

#ifndef COFSCAN_MASK_H_
#define COFSCAN_MASK_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cofscan/json.h"

namespace cofscan {

// Row-major 0/1 grid.
struct Bitmap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;

  Bitmap() = default;
  Bitmap(int w, int h, uint8_t fill = 0)
      : width(w), height(h),
        bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::size_t size() const { return bits.size(); }
  bool at(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  bool operator==(const Bitmap&) const = default;
};

// Binary region stored as alternating 0-runs and 1-runs over row-major pixel
// order, starting with a 0-run. Only the first run may be zero-length.
class PixelMask {
 public:
  PixelMask() = default;

  // Validates the run invariants; throws MalformedRuns.
  static PixelMask FromRuns(int width, int height, std::vector<uint32_t> runs);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<uint32_t>& runs() const { return runs_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  // Number of set pixels.
  std::size_t Area() const;
  bool Empty() const { return Area() == 0; }
  // Row-major index of the first set pixel, or pixel_count() when empty.
  std::size_t FirstSetIndex() const;

  bool operator==(const PixelMask&) const = default;

 private:
  PixelMask(int width, int height, std::vector<uint32_t> runs)
      : width_(width), height_(height), runs_(std::move(runs)) {}
  friend PixelMask RleEncode(const Bitmap& bitmap);

  int width_ = 0;
  int height_ = 0;
  std::vector<uint32_t> runs_;
};

PixelMask RleEncode(const Bitmap& bitmap);
Bitmap RleDecode(const PixelMask& mask);

// Per-pixel 0x00/0xFF selector, three bytes per pixel, for RGB compositing.
std::vector<uint8_t> ExpandToRgbSelector(const PixelMask& mask);

struct Centroid {
  double cx = 0.0;
  double cy = 0.0;
};

// Mean pixel-center position of set pixels, normalized to [0,1]^2 with the
// origin at the top-left. Throws EmptyMask.
Centroid MaskCentroid(const PixelMask& mask);

enum class PositionBucket { kTopLeft, kTopRight, kBottomLeft, kBottomRight };

// Quadrant of the centroid; exactly 0.5 resolves to top / left.
PositionBucket BucketForCentroid(const Centroid& centroid);
std::string_view PositionName(PositionBucket bucket);
// Throws InvalidArgument for unknown names.
PositionBucket ParsePosition(std::string_view name);

// Pixels set in none of `masks`. Throws DimensionMismatch.
PixelMask MaskComplement(std::span<const PixelMask> masks, int width,
                         int height);

// {"width": w, "height": h, "runs": [...]}
Json MaskToJson(const PixelMask& mask);
// Throws MalformedRuns for bad runs, InvalidArgument for bad shape.
PixelMask MaskFromJson(const Json& j);

}  // namespace cofscan

#endif  // COFSCAN_MASK_H_
