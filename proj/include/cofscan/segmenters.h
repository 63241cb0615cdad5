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

#ifndef COFSCAN_SEGMENTERS_H_
#define COFSCAN_SEGMENTERS_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cofscan/image.h"
#include "cofscan/json.h"
#include "cofscan/mask.h"
#include "cofscan/toolproto.h"

namespace cofscan {

struct Segment {
  std::string label;
  PixelMask mask;
  std::optional<double> score;
  std::string source;

  bool operator==(const Segment&) const = default;
};

struct SegmentationOutput {
  std::string image_id;
  std::vector<Segment> segments;
};

// Sorts by label, then by first set-pixel index.
void CanonicalizeSegments(std::vector<Segment>* segments);

Json SegmentToJson(const Segment& segment);
Segment SegmentFromJson(const Json& j, const std::string& default_source);
Json SegmentationToJson(const SegmentationOutput& output);

// One "background" segment covering every pixel of the most frequent exact
// RGB value; frequency ties go to the lexicographically smallest colour.
SegmentationOutput SegmentDominantColor(const RasterImage& image,
                                        const std::string& image_id = "");

// Most frequent exact colour (same tie rule as above).
Rgb DominantColor(const RasterImage& image);

// annotations.json: {"<image_id>": [{"label", "mask", "score"?}, ...], ...}
class AnnotationStore {
 public:
  AnnotationStore() = default;
  static AnnotationStore Load(const std::filesystem::path& path);
  static AnnotationStore FromJson(const Json& j);
  Json ToJson() const;
  void Save(const std::filesystem::path& path) const;

  void Put(const std::string& image_id, std::vector<Segment> segments);
  bool Contains(const std::string& image_id) const;
  // Throws UnknownImage.
  const std::vector<Segment>& Get(const std::string& image_id) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::vector<Segment>> entries_;
};

SegmentationOutput SegmentFromAnnotations(const std::string& image_id,
                                          const AnnotationStore& store);

// One protocol "segment" round trip. Masks must match width x height or
// DimensionMismatch is thrown. Empty masks are dropped.
SegmentationOutput SegmentExternal(ToolPool& tool,
                                   const std::filesystem::path& image_path,
                                   int width, int height,
                                   const std::string& image_id = "",
                                   const std::optional<std::string>& prompt = {});

// Appends one "unrecognised" segment for the uncovered pixels, if any.
SegmentationOutput FillUnrecognised(SegmentationOutput output, int width,
                                    int height);

inline constexpr const char* kUnrecognisedLabel = "unrecognised";
inline constexpr const char* kBackgroundLabel = "background";

// What a segmenter sees of one dataset image.
struct ImageInput {
  std::string id;
  std::filesystem::path path;
  const RasterImage* image = nullptr;
};

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual SegmentationOutput Run(const ImageInput& input) const = 0;
  virtual std::string Describe() const = 0;
};

std::unique_ptr<Segmenter> MakeDominantColorSegmenter();
std::unique_ptr<Segmenter> MakeAnnotationSegmenter(AnnotationStore store);
std::unique_ptr<Segmenter> MakeExternalSegmenter(
    std::shared_ptr<ToolPool> tool, std::optional<std::string> prompt);
// Wraps another segmenter with FillUnrecognised.
std::unique_ptr<Segmenter> WithUnrecognisedFill(std::unique_ptr<Segmenter> inner);

}  // namespace cofscan

#endif  // COFSCAN_SEGMENTERS_H_
