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

#ifndef COFSCAN_WATERMARK_H_
#define COFSCAN_WATERMARK_H_

#include <array>
#include <cstdint>
#include <vector>

#include "cofscan/image.h"
#include "cofscan/json.h"
#include "cofscan/mask.h"

namespace cofscan {

// Binary stamp: set cells are drawn in `ink`, clear cells in `paper`.
struct WatermarkTemplate {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> cells;  // row-major 0/1
  Rgb ink{255, 255, 255};
  Rgb paper{0, 0, 0};

  Json ToJson() const;
  static WatermarkTemplate FromJson(const Json& j);
  bool operator==(const WatermarkTemplate&) const = default;
};

// 12x4 high-contrast glyph block.
WatermarkTemplate DefaultWatermarkTemplate();

struct Anchor {
  int x = 0;
  int y = 0;
  PositionBucket corner = PositionBucket::kTopLeft;
};

// Top-left corners of the stamp in the four image corners, inset by `margin`
// pixels, ordered top-left, top-right, bottom-left, bottom-right.
std::array<Anchor, 4> WatermarkAnchors(int width, int height,
                                       const WatermarkTemplate& tmpl, int margin);

// True when the template does not fit at every anchor.
bool TemplateTooLarge(int width, int height, const WatermarkTemplate& tmpl,
                      int margin);

void StampWatermark(RasterImage* image, const WatermarkTemplate& tmpl,
                    const Anchor& anchor);

// Mask of the full stamp rectangle at `anchor`.
PixelMask WatermarkMask(int width, int height, const WatermarkTemplate& tmpl,
                        const Anchor& anchor);

// Exact pixel match of the template at `anchor`.
bool TemplatePresentAt(const RasterImage& image, const WatermarkTemplate& tmpl,
                       const Anchor& anchor);

}  // namespace cofscan

#endif  // COFSCAN_WATERMARK_H_
