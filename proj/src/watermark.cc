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

#include "cofscan/watermark.h"

#include <string>

#include "cofscan/error.h"

namespace cofscan {

Json WatermarkTemplate::ToJson() const {
  Json j;
  j["width"] = width;
  j["height"] = height;
  Json rows = Json::array();
  for (int y = 0; y < height; ++y) {
    std::string row;
    for (int x = 0; x < width; ++x) {
      row.push_back(cells[static_cast<std::size_t>(y) * width + x] ? '1' : '0');
    }
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["ink"] = Json::array({ink.r, ink.g, ink.b});
  j["paper"] = Json::array({paper.r, paper.g, paper.b});
  return j;
}

WatermarkTemplate WatermarkTemplate::FromJson(const Json& j) {
  WatermarkTemplate t;
  if (!j.is_object() || !j.contains("rows") || !j["rows"].is_array() ||
      j["rows"].empty()) {
    throw Error(ErrorCode::kConfigError, "watermark template needs \"rows\"");
  }
  t.height = static_cast<int>(j["rows"].size());
  t.width = static_cast<int>(j["rows"][0].get<std::string>().size());
  for (const auto& row : j["rows"]) {
    const std::string r = row.get<std::string>();
    if (static_cast<int>(r.size()) != t.width) {
      throw Error(ErrorCode::kConfigError, "watermark rows differ in length");
    }
    for (char c : r) {
      if (c != '0' && c != '1') {
        throw Error(ErrorCode::kConfigError, "watermark rows must be 0/1 strings");
      }
      t.cells.push_back(c == '1' ? 1 : 0);
    }
  }
  auto color = [&](const char* key, Rgb fallback) {
    if (!j.contains(key)) return fallback;
    const auto& a = j[key];
    return Rgb{a.at(0).get<uint8_t>(), a.at(1).get<uint8_t>(), a.at(2).get<uint8_t>()};
  };
  t.ink = color("ink", t.ink);
  t.paper = color("paper", t.paper);
  if (t.width < 1) throw Error(ErrorCode::kConfigError, "empty watermark template");
  return t;
}

WatermarkTemplate DefaultWatermarkTemplate() {
  static const char* kRows[] = {
      "111011101110",
      "100010101000",
      "101010101010",
      "111011101110",
  };
  WatermarkTemplate t;
  t.width = 12;
  t.height = 4;
  for (const char* row : kRows) {
    for (int x = 0; x < t.width; ++x) t.cells.push_back(row[x] == '1' ? 1 : 0);
  }
  return t;
}

std::array<Anchor, 4> WatermarkAnchors(int width, int height,
                                       const WatermarkTemplate& tmpl,
                                       int margin) {
  const int right = width - margin - tmpl.width;
  const int bottom = height - margin - tmpl.height;
  return {{{margin, margin, PositionBucket::kTopLeft},
           {right, margin, PositionBucket::kTopRight},
           {margin, bottom, PositionBucket::kBottomLeft},
           {right, bottom, PositionBucket::kBottomRight}}};
}

bool TemplateTooLarge(int width, int height, const WatermarkTemplate& tmpl,
                      int margin) {
  return margin < 0 || tmpl.width + 2 * margin > width ||
         tmpl.height + 2 * margin > height;
}

void StampWatermark(RasterImage* image, const WatermarkTemplate& tmpl,
                    const Anchor& anchor) {
  for (int y = 0; y < tmpl.height; ++y) {
    for (int x = 0; x < tmpl.width; ++x) {
      const bool ink = tmpl.cells[static_cast<std::size_t>(y) * tmpl.width + x];
      image->set(anchor.x + x, anchor.y + y, ink ? tmpl.ink : tmpl.paper);
    }
  }
}

PixelMask WatermarkMask(int width, int height, const WatermarkTemplate& tmpl,
                        const Anchor& anchor) {
  Bitmap bits(width, height);
  for (int y = 0; y < tmpl.height; ++y) {
    for (int x = 0; x < tmpl.width; ++x) bits.set(anchor.x + x, anchor.y + y, true);
  }
  return RleEncode(bits);
}

bool TemplatePresentAt(const RasterImage& image, const WatermarkTemplate& tmpl,
                       const Anchor& anchor) {
  if (anchor.x < 0 || anchor.y < 0 || anchor.x + tmpl.width > image.width() ||
      anchor.y + tmpl.height > image.height()) {
    return false;
  }
  for (int y = 0; y < tmpl.height; ++y) {
    for (int x = 0; x < tmpl.width; ++x) {
      const bool ink = tmpl.cells[static_cast<std::size_t>(y) * tmpl.width + x];
      if (image.at(anchor.x + x, anchor.y + y) != (ink ? tmpl.ink : tmpl.paper)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace cofscan
