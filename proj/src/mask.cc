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

#include "cofscan/mask.h"

#include <algorithm>
#include <limits>
#include <string>

#include "cofscan/error.h"
#include "cofscan/simd/kernels.h"

namespace cofscan {

PixelMask PixelMask::FromRuns(int width, int height,
                              std::vector<uint32_t> runs) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kMalformedRuns, "mask dimensions must be >= 1");
  }
  uint64_t total = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i] == 0 && i != 0) {
      throw Error(ErrorCode::kMalformedRuns,
                  "zero-length run at position " + std::to_string(i));
    }
    total += runs[i];
  }
  const uint64_t expected = static_cast<uint64_t>(width) * height;
  if (total != expected) {
    throw Error(ErrorCode::kMalformedRuns,
                "runs sum to " + std::to_string(total) + ", expected " +
                    std::to_string(expected));
  }
  return PixelMask(width, height, std::move(runs));
}

std::size_t PixelMask::Area() const {
  std::size_t area = 0;
  for (std::size_t i = 1; i < runs_.size(); i += 2) area += runs_[i];
  return area;
}

std::size_t PixelMask::FirstSetIndex() const {
  if (runs_.size() < 2) return pixel_count();
  return runs_[0];
}

PixelMask RleEncode(const Bitmap& bitmap) {
  const auto& kernels = simd::ActiveKernels();
  std::vector<uint32_t> runs;
  std::span<const uint8_t> bits = bitmap.bits;
  std::size_t pos = 0;
  bool value = false;
  while (pos < bits.size()) {
    const std::size_t end = kernels.run_end(bits, pos, value);
    runs.push_back(static_cast<uint32_t>(end - pos));
    pos = end;
    value = !value;
  }
  if (runs.empty()) runs.push_back(0);
  return PixelMask(bitmap.width, bitmap.height, std::move(runs));
}

Bitmap RleDecode(const PixelMask& mask) {
  // Masks built through FromRuns/RleEncode already satisfy the sum invariant;
  // a default-constructed mask does not.
  uint64_t total = 0;
  for (uint32_t r : mask.runs()) total += r;
  if (mask.width() < 1 || mask.height() < 1 || total != mask.pixel_count()) {
    throw Error(ErrorCode::kMalformedRuns, "runs do not cover the mask");
  }
  Bitmap out(mask.width(), mask.height());
  std::size_t pos = 0;
  uint8_t value = 0;
  for (uint32_t run : mask.runs()) {
    std::fill_n(out.bits.begin() + static_cast<std::ptrdiff_t>(pos), run, value);
    pos += run;
    value ^= 1;
  }
  return out;
}

std::vector<uint8_t> ExpandToRgbSelector(const PixelMask& mask) {
  std::vector<uint8_t> selector(mask.pixel_count() * 3, 0);
  std::size_t pos = 0;
  bool value = false;
  for (uint32_t run : mask.runs()) {
    if (value) {
      std::fill_n(selector.begin() + static_cast<std::ptrdiff_t>(pos * 3),
                  static_cast<std::size_t>(run) * 3, uint8_t{0xFF});
    }
    pos += run;
    value = !value;
  }
  return selector;
}

Centroid MaskCentroid(const PixelMask& mask) {
  uint64_t n = 0;
  uint64_t sum_x = 0;
  uint64_t sum_y = 0;
  const auto width = static_cast<uint64_t>(mask.width());
  uint64_t pos = 0;
  bool value = false;
  for (uint32_t run : mask.runs()) {
    if (value) {
      for (uint64_t i = pos; i < pos + run; ++i) {
        sum_x += i % width;
        sum_y += i / width;
      }
      n += run;
    }
    pos += run;
    value = !value;
  }
  if (n == 0) throw Error(ErrorCode::kEmptyMask, "centroid of empty mask");
  const double count = static_cast<double>(n);
  return {(static_cast<double>(sum_x) + 0.5 * count) / (count * mask.width()),
          (static_cast<double>(sum_y) + 0.5 * count) / (count * mask.height())};
}

PositionBucket BucketForCentroid(const Centroid& c) {
  const bool top = c.cy <= 0.5;
  const bool left = c.cx <= 0.5;
  if (top) return left ? PositionBucket::kTopLeft : PositionBucket::kTopRight;
  return left ? PositionBucket::kBottomLeft : PositionBucket::kBottomRight;
}

std::string_view PositionName(PositionBucket bucket) {
  switch (bucket) {
    case PositionBucket::kTopLeft: return "top-left";
    case PositionBucket::kTopRight: return "top-right";
    case PositionBucket::kBottomLeft: return "bottom-left";
    case PositionBucket::kBottomRight: return "bottom-right";
  }
  return "top-left";
}

PositionBucket ParsePosition(std::string_view name) {
  for (PositionBucket b :
       {PositionBucket::kTopLeft, PositionBucket::kTopRight,
        PositionBucket::kBottomLeft, PositionBucket::kBottomRight}) {
    if (PositionName(b) == name) return b;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown position '" + std::string(name) + "'");
}

PixelMask MaskComplement(std::span<const PixelMask> masks, int width,
                         int height) {
  const auto& kernels = simd::ActiveKernels();
  Bitmap covered(width, height);
  for (const PixelMask& m : masks) {
    if (m.width() != width || m.height() != height) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "mask " + std::to_string(m.width()) + "x" +
                      std::to_string(m.height()) + " vs image " +
                      std::to_string(width) + "x" + std::to_string(height));
    }
    const Bitmap bits = RleDecode(m);
    kernels.or_into(covered.bits, bits.bits);
  }
  for (uint8_t& b : covered.bits) b ^= 1;
  return RleEncode(covered);
}

Json MaskToJson(const PixelMask& mask) {
  Json j;
  j["width"] = mask.width();
  j["height"] = mask.height();
  j["runs"] = mask.runs();
  return j;
}

PixelMask MaskFromJson(const Json& j) {
  if (!j.is_object() || !j.contains("width") || !j.contains("height") ||
      !j.contains("runs") || !j["runs"].is_array() ||
      !j["width"].is_number_integer() || !j["height"].is_number_integer()) {
    throw Error(ErrorCode::kInvalidArgument,
                "mask must be {\"width\", \"height\", \"runs\"}");
  }
  std::vector<uint32_t> runs;
  runs.reserve(j["runs"].size());
  for (const auto& r : j["runs"]) {
    if (!r.is_number_integer() || r.get<int64_t>() < 0 ||
        r.get<int64_t>() > std::numeric_limits<uint32_t>::max()) {
      throw Error(ErrorCode::kMalformedRuns, "runs must be non-negative integers");
    }
    runs.push_back(r.get<uint32_t>());
  }
  return PixelMask::FromRuns(j["width"].get<int>(), j["height"].get<int>(),
                             std::move(runs));
}

}  // namespace cofscan
