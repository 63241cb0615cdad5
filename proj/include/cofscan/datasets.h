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

#ifndef COFSCAN_DATASETS_H_
#define COFSCAN_DATASETS_H_

// Controlled-bias dataset generators. Layout written by both generators:
//
//   images/<id>.png     8-bit RGB
//   labels.csv          id,class
//   annotations.json    id -> segments

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cofscan/image.h"
#include "cofscan/json.h"
#include "cofscan/watermark.h"

namespace cofscan {

// One colour per class 0-9. None is black, which marks glyph background.
std::vector<Rgb> DefaultPalette();

// Ordered (id, class) pairs.
using LabelList = std::vector<std::pair<std::string, std::string>>;
// Accepts an optional "id,class" header. Throws IoError / InvalidArgument.
LabelList ReadLabelsCsv(const std::filesystem::path& path);
void WriteLabelsCsv(const std::filesystem::path& path, const LabelList& labels);

struct DatasetSummary {
  int images = 0;
  std::map<std::string, int> per_class;
  int watermarked = 0;
  std::map<std::string, int> watermarks_per_corner;  // keyed by position name
  Json ToJson() const;
};

// 28x28 seeded random strokes on black. Stroke pixels are never 0.
GrayImage SyntheticGlyph(int digit, int index, uint64_t seed);

// Black pixels become `color`; every other value is replicated to RGB.
RasterImage ColorizeGlyph(const GrayImage& glyph, Rgb color);

struct ColoredMnistSpec {
  int n_per_class = 100;  // synthetic glyphs only
  uint64_t seed = 0;
  std::vector<Rgb> palette = DefaultPalette();
  // Directory with images/<id>.png (single-channel) and labels.csv. When set,
  // it replaces the synthetic glyphs.
  std::optional<std::filesystem::path> source_dir;
};

// Throws InvalidLabel for classes outside 0-9 and InvalidArgument for a bad
// palette.
DatasetSummary GenColoredMnist(const ColoredMnistSpec& spec,
                               const std::filesystem::path& out_dir);

struct WatermarkSpec {
  WatermarkTemplate tmpl = DefaultWatermarkTemplate();
  double fraction = 0.10;  // of class-A images
  bool stratified = true;  // round-robin corners instead of random ones
  int margin = 2;
  int n_per_class = 500;
  int width = 64;
  int height = 64;
  uint64_t seed = 0;
  std::string class_a = "A";
  std::string class_b = "B";
  Rgb base_a{170, 150, 120};
  Rgb base_b{90, 90, 100};
  int noise = 20;  // per-channel uniform offset in [-noise, noise]
  // Stamped class-A images are drawn on the class-B texture, so only the
  // watermark tells them apart.
  bool stamped_on_opposite_texture = true;

  Json ToJson() const;
  static WatermarkSpec FromJson(const Json& j);
};

// Throws TemplateTooLarge and InvalidArgument.
DatasetSummary GenWatermarkDataset(const WatermarkSpec& spec,
                                   const std::filesystem::path& out_dir);

// Class names "0".."9" mapped from the palette, for dominant_color_rule
// classifier configs.
Json PaletteClassifierJson(const std::vector<Rgb>& palette);

// Scan configs reproducing the two experiments on a generated dataset:
// dominant-colour segmenter + shift-to-next-class fill + palette classifier,
// and annotation segmenter (with "unrecognised" fill) + texture-colour fill +
// watermark oracle.
Json ColoredMnistScanConfig(const ColoredMnistSpec& spec, const std::string& dataset,
                            const std::string& run_dir);
Json WatermarkScanConfig(const WatermarkSpec& spec, const std::string& dataset,
                         const std::string& run_dir);

}  // namespace cofscan

#endif  // COFSCAN_DATASETS_H_
