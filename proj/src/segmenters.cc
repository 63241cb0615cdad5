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

#include "cofscan/segmenters.h"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "cofscan/error.h"

namespace cofscan {

void CanonicalizeSegments(std::vector<Segment>* segments) {
  std::stable_sort(segments->begin(), segments->end(),
                   [](const Segment& a, const Segment& b) {
                     if (a.label != b.label) return a.label < b.label;
                     return a.mask.FirstSetIndex() < b.mask.FirstSetIndex();
                   });
}

Json SegmentToJson(const Segment& segment) {
  Json j;
  j["label"] = segment.label;
  j["mask"] = MaskToJson(segment.mask);
  if (segment.score) j["score"] = *segment.score;
  if (!segment.source.empty()) j["source"] = segment.source;
  return j;
}

Segment SegmentFromJson(const Json& j, const std::string& default_source) {
  if (!j.is_object() || !j.contains("label") || !j["label"].is_string() ||
      !j.contains("mask")) {
    throw Error(ErrorCode::kInvalidArgument,
                "segment needs a string \"label\" and a \"mask\"");
  }
  Segment s;
  s.label = j["label"].get<std::string>();
  if (s.label.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "segment label is empty");
  }
  s.mask = MaskFromJson(j["mask"]);
  if (j.contains("score") && j["score"].is_number()) {
    s.score = j["score"].get<double>();
  }
  s.source = j.contains("source") && j["source"].is_string()
                 ? j["source"].get<std::string>()
                 : default_source;
  return s;
}

Json SegmentationToJson(const SegmentationOutput& output) {
  Json j;
  j["image_id"] = output.image_id;
  Json segs = Json::array();
  for (const auto& s : output.segments) segs.push_back(SegmentToJson(s));
  j["segments"] = std::move(segs);
  return j;
}

Rgb DominantColor(const RasterImage& image) {
  if (image.empty()) throw Error(ErrorCode::kInvalidArgument, "empty image");
  std::unordered_map<uint32_t, uint32_t> histogram;
  histogram.reserve(256);
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    ++histogram[image.at(i).Packed()];
  }
  uint32_t best = 0;
  uint32_t best_count = 0;
  for (const auto& [color, count] : histogram) {
    if (count > best_count || (count == best_count && color < best)) {
      best = color;
      best_count = count;
    }
  }
  return Rgb::FromPacked(best);
}

SegmentationOutput SegmentDominantColor(const RasterImage& image,
                                        const std::string& image_id) {
  const Rgb dominant = DominantColor(image);
  Bitmap bits(image.width(), image.height());
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    bits.bits[i] = image.at(i) == dominant ? 1 : 0;
  }
  SegmentationOutput out{image_id, {}};
  out.segments.push_back(
      {kBackgroundLabel, RleEncode(bits), std::nullopt, "dominant_color"});
  return out;
}

AnnotationStore AnnotationStore::FromJson(const Json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "annotations must be an object");
  }
  AnnotationStore store;
  for (const auto& [id, list] : j.items()) {
    if (!list.is_array()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "annotations for '" + id + "' must be a list");
    }
    std::vector<Segment> segments;
    for (const auto& entry : list) {
      Segment s = SegmentFromJson(entry, "annotations");
      if (s.mask.Empty()) {
        throw Error(ErrorCode::kEmptyMask,
                    "annotation '" + s.label + "' of '" + id + "' is empty");
      }
      segments.push_back(std::move(s));
    }
    store.Put(id, std::move(segments));
  }
  return store;
}

AnnotationStore AnnotationStore::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  try {
    return FromJson(Json::parse(in));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                path.string() + ": " + std::string(e.what()));
  }
}

Json AnnotationStore::ToJson() const {
  Json j = Json::object();
  for (const auto& [id, segments] : entries_) {
    Json list = Json::array();
    for (const auto& s : segments) {
      Json e;
      e["label"] = s.label;
      e["mask"] = MaskToJson(s.mask);
      if (s.score) e["score"] = *s.score;
      list.push_back(std::move(e));
    }
    j[id] = std::move(list);
  }
  return j;
}

void AnnotationStore::Save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << ToJson().dump() << "\n";
}

void AnnotationStore::Put(const std::string& image_id,
                          std::vector<Segment> segments) {
  entries_[image_id] = std::move(segments);
}

bool AnnotationStore::Contains(const std::string& image_id) const {
  return entries_.count(image_id) != 0;
}

const std::vector<Segment>& AnnotationStore::Get(
    const std::string& image_id) const {
  const auto it = entries_.find(image_id);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kUnknownImage, "no annotations for '" + image_id + "'");
  }
  return it->second;
}

SegmentationOutput SegmentFromAnnotations(const std::string& image_id,
                                          const AnnotationStore& store) {
  SegmentationOutput out{image_id, store.Get(image_id)};
  CanonicalizeSegments(&out.segments);
  return out;
}

SegmentationOutput SegmentExternal(ToolPool& tool,
                                   const std::filesystem::path& image_path,
                                   int width, int height,
                                   const std::string& image_id,
                                   const std::optional<std::string>& prompt) {
  ToolRequest req;
  req.op = "segment";
  req.image_path = image_path.string();
  req.prompt = prompt;
  const ToolResponse resp = tool.Call(std::move(req));
  if (!resp.payload.contains("segments") || !resp.payload["segments"].is_array()) {
    throw ToolError(ToolFailure::kMalformed, "segment response lacks \"segments\"");
  }
  SegmentationOutput out{image_id, {}};
  for (const auto& entry : resp.payload["segments"]) {
    Segment s;
    try {
      s = SegmentFromJson(entry, tool.info().name);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kMalformedRuns) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "segment mask does not cover the image: " + std::string(e.what()));
      }
      throw ToolError(ToolFailure::kMalformed, e.what());
    }
    if (s.mask.width() != width || s.mask.height() != height) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "segment '" + s.label + "' mask is " +
                      std::to_string(s.mask.width()) + "x" +
                      std::to_string(s.mask.height()) + ", image is " +
                      std::to_string(width) + "x" + std::to_string(height));
    }
    if (s.mask.Empty()) continue;
    out.segments.push_back(std::move(s));
  }
  CanonicalizeSegments(&out.segments);
  return out;
}

SegmentationOutput FillUnrecognised(SegmentationOutput output, int width,
                                    int height) {
  std::vector<PixelMask> masks;
  masks.reserve(output.segments.size());
  for (const auto& s : output.segments) masks.push_back(s.mask);
  PixelMask rest = MaskComplement(masks, width, height);
  if (!rest.Empty()) {
    output.segments.push_back(
        {kUnrecognisedLabel, std::move(rest), std::nullopt, "complement"});
    CanonicalizeSegments(&output.segments);
  }
  return output;
}

namespace {

class DominantColorSegmenter : public Segmenter {
 public:
  SegmentationOutput Run(const ImageInput& input) const override {
    return SegmentDominantColor(*input.image, input.id);
  }
  std::string Describe() const override { return "dominant_color"; }
};

class AnnotationSegmenter : public Segmenter {
 public:
  explicit AnnotationSegmenter(AnnotationStore store) : store_(std::move(store)) {}
  SegmentationOutput Run(const ImageInput& input) const override {
    SegmentationOutput out = SegmentFromAnnotations(input.id, store_);
    for (const auto& s : out.segments) {
      if (s.mask.width() != input.image->width() ||
          s.mask.height() != input.image->height()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "annotation '" + s.label + "' does not match image '" +
                        input.id + "'");
      }
    }
    return out;
  }
  std::string Describe() const override { return "annotations"; }

 private:
  AnnotationStore store_;
};

class ExternalSegmenter : public Segmenter {
 public:
  ExternalSegmenter(std::shared_ptr<ToolPool> tool,
                    std::optional<std::string> prompt)
      : tool_(std::move(tool)), prompt_(std::move(prompt)) {}
  SegmentationOutput Run(const ImageInput& input) const override {
    return SegmentExternal(*tool_, input.path, input.image->width(),
                           input.image->height(), input.id, prompt_);
  }
  std::string Describe() const override {
    return "external:" + tool_->info().name;
  }

 private:
  std::shared_ptr<ToolPool> tool_;
  std::optional<std::string> prompt_;
};

class UnrecognisedFill : public Segmenter {
 public:
  explicit UnrecognisedFill(std::unique_ptr<Segmenter> inner)
      : inner_(std::move(inner)) {}
  SegmentationOutput Run(const ImageInput& input) const override {
    return FillUnrecognised(inner_->Run(input), input.image->width(),
                            input.image->height());
  }
  std::string Describe() const override {
    return inner_->Describe() + "+unrecognised";
  }

 private:
  std::unique_ptr<Segmenter> inner_;
};

}  // namespace

std::unique_ptr<Segmenter> MakeDominantColorSegmenter() {
  return std::make_unique<DominantColorSegmenter>();
}

std::unique_ptr<Segmenter> MakeAnnotationSegmenter(AnnotationStore store) {
  return std::make_unique<AnnotationSegmenter>(std::move(store));
}

std::unique_ptr<Segmenter> MakeExternalSegmenter(
    std::shared_ptr<ToolPool> tool, std::optional<std::string> prompt) {
  return std::make_unique<ExternalSegmenter>(std::move(tool), std::move(prompt));
}

std::unique_ptr<Segmenter> WithUnrecognisedFill(std::unique_ptr<Segmenter> inner) {
  return std::make_unique<UnrecognisedFill>(std::move(inner));
}

}  // namespace cofscan
