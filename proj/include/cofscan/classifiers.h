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

#ifndef COFSCAN_CLASSIFIERS_H_
#define COFSCAN_CLASSIFIERS_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "cofscan/image.h"
#include "cofscan/json.h"
#include "cofscan/toolproto.h"
#include "cofscan/watermark.h"

namespace cofscan {

struct ClassDecision {
  std::string label;
  std::optional<std::map<std::string, double>> scores;

  bool operator==(const ClassDecision&) const = default;
};

// Decision from raw scores: argmax, ties to the lexicographically smallest
// class name.
ClassDecision DecisionFromScores(std::map<std::string, double> scores);

struct DominantColorRule {
  std::map<Rgb, std::string> palette;
  std::string fallback = "unknown";
};

// palette[most frequent colour among palette-coloured pixels]; fallback when
// no pixel is a palette colour. Ties go to the smallest colour.
ClassDecision ClassifyDominantColor(const RasterImage& image,
                                    const DominantColorRule& rule);

struct TextureRule {
  double threshold = 128.0;  // mean of (r+g+b)/3 over the image
  std::string above = "A";   // mean >= threshold
  std::string below = "B";
};

std::string ApplyTextureRule(const RasterImage& image, const TextureRule& rule);
double MeanIntensity(const RasterImage& image);

struct WatermarkOracle {
  WatermarkTemplate tmpl = DefaultWatermarkTemplate();
  int margin = 2;
  std::string shortcut_class = "A";
  TextureRule texture;
};

// Shortcut class when the exact template sits at any corner anchor, otherwise
// the texture rule decides.
ClassDecision ClassifyWatermarkOracle(const RasterImage& image,
                                      const WatermarkOracle& oracle);

// One protocol "classify" round trip.
ClassDecision ClassifyExternal(ToolPool& tool,
                               const std::filesystem::path& image_path);

enum class ClassifierKind { kDominantColorRule, kWatermarkOracle, kExternal };

struct ClassifierRef {
  ClassifierKind kind = ClassifierKind::kDominantColorRule;
  DominantColorRule dominant;
  WatermarkOracle watermark;
  std::optional<ToolCommand> tool;

  Json ToJson() const;
  // Throws ConfigError.
  static ClassifierRef FromJson(const Json& j);
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  // `path` names a PNG holding exactly `image` when one exists on disk;
  // it may be empty for in-memory images.
  virtual ClassDecision Classify(const RasterImage& image,
                                 const std::filesystem::path& path) const = 0;
  // External classifiers need the image on disk.
  virtual bool NeedsPath() const { return false; }
  virtual bool Deterministic() const { return true; }
  virtual std::string Describe() const = 0;
};

// `tool` must be set for external classifiers.
std::unique_ptr<Classifier> MakeClassifier(const ClassifierRef& ref,
                                           std::shared_ptr<ToolPool> tool = nullptr);

}  // namespace cofscan

#endif  // COFSCAN_CLASSIFIERS_H_
