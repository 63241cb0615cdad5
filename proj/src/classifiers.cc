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

#include "cofscan/classifiers.h"

#include <unordered_map>

#include "cofscan/error.h"

namespace cofscan {

ClassDecision DecisionFromScores(std::map<std::string, double> scores) {
  if (scores.empty()) {
    throw Error(ErrorCode::kClassificationFailed, "no scores to decide from");
  }
  // std::map iterates in name order, so the first maximum is the tie winner.
  auto best = scores.begin();
  for (auto it = scores.begin(); it != scores.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  ClassDecision d;
  d.label = best->first;
  d.scores = std::move(scores);
  return d;
}

ClassDecision ClassifyDominantColor(const RasterImage& image,
                                    const DominantColorRule& rule) {
  std::unordered_map<uint32_t, uint32_t> counts;
  std::unordered_map<uint32_t, const std::string*> lookup;
  for (const auto& [color, label] : rule.palette) lookup[color.Packed()] = &label;
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const uint32_t c = image.at(i).Packed();
    if (lookup.count(c)) ++counts[c];
  }
  if (counts.empty()) return {rule.fallback, std::nullopt};
  uint32_t best = 0;
  uint32_t best_count = 0;
  for (const auto& [color, count] : counts) {
    if (count > best_count || (count == best_count && color < best)) {
      best = color;
      best_count = count;
    }
  }
  return {*lookup[best], std::nullopt};
}

double MeanIntensity(const RasterImage& image) {
  uint64_t total = 0;
  for (uint8_t v : image.bytes()) total += v;
  return static_cast<double>(total) / (3.0 * static_cast<double>(image.pixel_count()));
}

std::string ApplyTextureRule(const RasterImage& image, const TextureRule& rule) {
  return MeanIntensity(image) >= rule.threshold ? rule.above : rule.below;
}

ClassDecision ClassifyWatermarkOracle(const RasterImage& image,
                                      const WatermarkOracle& oracle) {
  if (!TemplateTooLarge(image.width(), image.height(), oracle.tmpl, oracle.margin)) {
    for (const Anchor& a :
         WatermarkAnchors(image.width(), image.height(), oracle.tmpl, oracle.margin)) {
      if (TemplatePresentAt(image, oracle.tmpl, a)) {
        return {oracle.shortcut_class, std::nullopt};
      }
    }
  }
  return {ApplyTextureRule(image, oracle.texture), std::nullopt};
}

ClassDecision ClassifyExternal(ToolPool& tool,
                               const std::filesystem::path& image_path) {
  ToolRequest req;
  req.op = "classify";
  req.image_path = image_path.string();
  const ToolResponse resp = tool.Call(std::move(req));
  const Json& p = resp.payload;
  if (!p.contains("class") || !p["class"].is_string() ||
      p["class"].get<std::string>().empty()) {
    throw ToolError(ToolFailure::kMalformed, "classify response lacks \"class\"");
  }
  ClassDecision d;
  d.label = p["class"].get<std::string>();
  if (p.contains("scores") && p["scores"].is_object()) {
    std::map<std::string, double> scores;
    for (const auto& [k, v] : p["scores"].items()) {
      if (!v.is_number()) throw ToolError(ToolFailure::kMalformed, "non-numeric score");
      scores[k] = v.get<double>();
    }
    const ClassDecision check = DecisionFromScores(scores);
    if (check.label != d.label) {
      throw ToolError(ToolFailure::kMalformed,
                      "class '" + d.label + "' does not attain the maximum score");
    }
    d.scores = std::move(scores);
  }
  return d;
}

Json ClassifierRef::ToJson() const {
  Json j;
  switch (kind) {
    case ClassifierKind::kDominantColorRule: {
      j["kind"] = "dominant_color_rule";
      Json palette = Json::object();
      for (const auto& [color, label] : dominant.palette) palette[label] = RgbToJson(color);
      j["palette"] = palette;
      j["fallback"] = dominant.fallback;
      break;
    }
    case ClassifierKind::kWatermarkOracle:
      j["kind"] = "watermark_oracle";
      j["template"] = watermark.tmpl.ToJson();
      j["margin"] = watermark.margin;
      j["shortcut_class"] = watermark.shortcut_class;
      j["texture_rule"] = {{"threshold", watermark.texture.threshold},
                           {"above", watermark.texture.above},
                           {"below", watermark.texture.below}};
      break;
    case ClassifierKind::kExternal:
      j["kind"] = "external";
      if (tool) j["tool"] = tool->ToJson();
      break;
  }
  return j;
}

ClassifierRef ClassifierRef::FromJson(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorCode::kConfigError, "classifier needs a \"kind\"");
  }
  ClassifierRef ref;
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "dominant_color_rule") {
    ref.kind = ClassifierKind::kDominantColorRule;
    if (!j.contains("palette") || !j["palette"].is_object() || j["palette"].empty()) {
      throw Error(ErrorCode::kConfigError, "dominant_color_rule needs a non-empty palette");
    }
    for (const auto& [label, color] : j["palette"].items()) {
      const Rgb c = RgbFromJson(color);
      if (ref.dominant.palette.count(c)) {
        throw Error(ErrorCode::kConfigError, "palette colour used twice: " + ToString(c));
      }
      ref.dominant.palette[c] = label;
    }
    if (j.contains("fallback")) ref.dominant.fallback = j["fallback"].get<std::string>();
  } else if (kind == "watermark_oracle") {
    ref.kind = ClassifierKind::kWatermarkOracle;
    if (j.contains("template")) ref.watermark.tmpl = WatermarkTemplate::FromJson(j["template"]);
    if (j.contains("margin")) ref.watermark.margin = j["margin"].get<int>();
    if (!j.contains("shortcut_class") || !j.contains("texture_rule")) {
      throw Error(ErrorCode::kConfigError,
                  "watermark_oracle needs \"shortcut_class\" and \"texture_rule\"");
    }
    ref.watermark.shortcut_class = j["shortcut_class"].get<std::string>();
    const Json& t = j["texture_rule"];
    ref.watermark.texture.threshold = t.at("threshold").get<double>();
    ref.watermark.texture.above = t.at("above").get<std::string>();
    ref.watermark.texture.below = t.at("below").get<std::string>();
  } else if (kind == "external") {
    ref.kind = ClassifierKind::kExternal;
    if (!j.contains("tool")) throw Error(ErrorCode::kConfigError, "external classifier needs a \"tool\"");
    ref.tool = ToolCommand::FromJson(j["tool"]);
  } else {
    throw Error(ErrorCode::kConfigError, "unknown classifier kind '" + kind + "'");
  }
  return ref;
}

namespace {

class DominantColorClassifier : public Classifier {
 public:
  explicit DominantColorClassifier(DominantColorRule rule) : rule_(std::move(rule)) {}
  ClassDecision Classify(const RasterImage& image,
                         const std::filesystem::path&) const override {
    return ClassifyDominantColor(image, rule_);
  }
  std::string Describe() const override { return "dominant_color_rule"; }

 private:
  DominantColorRule rule_;
};

class WatermarkOracleClassifier : public Classifier {
 public:
  explicit WatermarkOracleClassifier(WatermarkOracle oracle) : oracle_(std::move(oracle)) {}
  ClassDecision Classify(const RasterImage& image,
                         const std::filesystem::path&) const override {
    return ClassifyWatermarkOracle(image, oracle_);
  }
  std::string Describe() const override { return "watermark_oracle"; }

 private:
  WatermarkOracle oracle_;
};

class ExternalClassifier : public Classifier {
 public:
  explicit ExternalClassifier(std::shared_ptr<ToolPool> tool) : tool_(std::move(tool)) {}
  ClassDecision Classify(const RasterImage&,
                         const std::filesystem::path& path) const override {
    if (path.empty()) {
      throw Error(ErrorCode::kClassificationFailed,
                  "external classifier needs the image on disk");
    }
    return ClassifyExternal(*tool_, path);
  }
  bool NeedsPath() const override { return true; }
  bool Deterministic() const override { return tool_->info().deterministic; }
  std::string Describe() const override { return "external:" + tool_->info().name; }

 private:
  std::shared_ptr<ToolPool> tool_;
};

}  // namespace

std::unique_ptr<Classifier> MakeClassifier(const ClassifierRef& ref,
                                           std::shared_ptr<ToolPool> tool) {
  switch (ref.kind) {
    case ClassifierKind::kDominantColorRule:
      return std::make_unique<DominantColorClassifier>(ref.dominant);
    case ClassifierKind::kWatermarkOracle:
      return std::make_unique<WatermarkOracleClassifier>(ref.watermark);
    case ClassifierKind::kExternal:
      if (tool == nullptr) {
        throw Error(ErrorCode::kConfigError, "external classifier has no tool");
      }
      if (!tool->info().Supports("classify")) {
        throw Error(ErrorCode::kConfigError,
                    "tool '" + tool->info().name + "' does not advertise classify");
      }
      return std::make_unique<ExternalClassifier>(std::move(tool));
  }
  throw Error(ErrorCode::kConfigError, "unknown classifier");
}

}  // namespace cofscan
