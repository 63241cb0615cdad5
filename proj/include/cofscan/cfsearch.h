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

#ifndef COFSCAN_CFSEARCH_H_
#define COFSCAN_CFSEARCH_H_

// Exhaustive single-segment counterfactual search. Every (segment, edit) pair
// of every image is applied to the pristine original and re-classified.

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cofscan/classifiers.h"
#include "cofscan/editors.h"
#include "cofscan/evaluation.h"
#include "cofscan/json.h"
#include "cofscan/segmenters.h"
#include "cofscan/toolproto.h"

namespace cofscan {

struct DatasetImage {
  std::string id;
  std::filesystem::path path;
  std::optional<std::string> ground_truth;
};

struct Dataset {
  std::filesystem::path root;
  std::vector<DatasetImage> images;  // sorted by id
};

// Reads images/<id>.png and the optional labels.csv. Throws IoError when the
// directory is unreadable and EmptyDataset when it has no images.
Dataset LoadDataset(const std::filesystem::path& root);

struct Pipeline {
  std::unique_ptr<Segmenter> segmenter;
  std::vector<std::unique_ptr<Editor>> editors;
  std::unique_ptr<Classifier> classifier;
  // Tool pools owned by the stages above, listed for the manifest.
  std::vector<std::pair<std::string, std::shared_ptr<ToolPool>>> tools;
  Json config = Json::object();  // embedded in the manifest
};

struct ScanOptions {
  std::filesystem::path run_dir;
  std::string run_id;
  int workers = 1;
  bool flips_only = false;
  // Every n-th image of a nondeterministic-capable (external) classifier is
  // classified twice. 0 disables the check.
  int determinism_every = 100;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

struct CandidateFailure {
  std::string image_id;
  int segment_index = 0;
  std::string edit_id;
  std::string stage;  // "edit" or "classify"
  std::string error;
  Json ToJson() const;
};

enum class ImageStatus { kProcessed, kSkippedNoSegments, kFailed };
std::string_view ImageStatusName(ImageStatus status);

struct ImageScanResult {
  std::string image_id;
  ImageStatus status = ImageStatus::kProcessed;
  std::string error;
  int width = 0;
  int height = 0;
  std::string original_class;
  std::vector<Segment> segments;
  std::vector<Evaluation> evaluations;  // canonical order
  std::vector<CandidateFailure> failures;
  std::optional<bool> determinism_ok;  // set when the image was sampled
};

// Runs one image through the pipeline. Flipped edits are written to
// <run_dir>/artifacts/<image_id>/<segment_index>_<edit_id>.png.
ImageScanResult ScanImage(const DatasetImage& image, const Pipeline& pipeline,
                          const ScanOptions& options, bool check_determinism = false);

struct ScanSummary {
  int images = 0;
  int processed = 0;
  int skipped_no_segments = 0;
  int failed = 0;
  int64_t evaluations = 0;
  int64_t counterfactuals = 0;
  int64_t failed_candidates = 0;
  int determinism_mismatches = 0;
  Json manifest;
};

// Writes evaluations.jsonl, segments.jsonl and manifest.json under
// options.run_dir. Per-image failures are recorded, never thrown.
ScanSummary ScanDataset(const Dataset& dataset, const Pipeline& pipeline,
                        const ScanOptions& options);

// One line per processed image: {"image_id","width","height","segments"}.
inline constexpr const char* kSegmentsFile = "segments.jsonl";
inline constexpr const char* kEvaluationsFile = "evaluations.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";

std::filesystem::path ArtifactPath(const std::filesystem::path& run_dir,
                                   const std::string& image_id, int segment_index,
                                   const std::string& edit_id);

}  // namespace cofscan

#endif  // COFSCAN_CFSEARCH_H_
