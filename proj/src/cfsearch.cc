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

#include "cofscan/cfsearch.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "cofscan/datasets.h"
#include "cofscan/error.h"
#include "cofscan/image.h"
#include "cofscan/mask.h"
#include "cofscan/simd/kernels.h"

namespace cofscan {

namespace fs = std::filesystem;

Dataset LoadDataset(const fs::path& root) {
  const fs::path images_dir = root / "images";
  std::error_code ec;
  if (!fs::is_directory(images_dir, ec)) {
    throw Error(ErrorCode::kIoError, "no images/ directory under " + root.string());
  }
  Dataset ds;
  ds.root = root;
  for (const auto& entry : fs::directory_iterator(images_dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
    ds.images.push_back({entry.path().stem().string(), entry.path(), std::nullopt});
  }
  if (ec) throw Error(ErrorCode::kIoError, "cannot list " + images_dir.string());
  if (ds.images.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no PNG images under " + images_dir.string());
  }
  std::sort(ds.images.begin(), ds.images.end(),
            [](const DatasetImage& a, const DatasetImage& b) { return a.id < b.id; });
  if (fs::exists(root / "labels.csv")) {
    std::map<std::string, std::string> labels;
    for (auto& [id, cls] : ReadLabelsCsv(root / "labels.csv")) labels[id] = cls;
    for (DatasetImage& img : ds.images) {
      auto it = labels.find(img.id);
      if (it != labels.end()) img.ground_truth = it->second;
    }
  }
  return ds;
}

Json CandidateFailure::ToJson() const {
  Json j;
  j["image_id"] = image_id;
  j["segment_index"] = segment_index;
  j["edit_id"] = edit_id;
  j["stage"] = stage;
  j["error"] = error;
  return j;
}

std::string_view ImageStatusName(ImageStatus status) {
  switch (status) {
    case ImageStatus::kProcessed: return "processed";
    case ImageStatus::kSkippedNoSegments: return "skipped-no-segments";
    case ImageStatus::kFailed: return "failed";
  }
  return "?";
}

fs::path ArtifactPath(const fs::path& run_dir, const std::string& image_id,
                      int segment_index, const std::string& edit_id) {
  return run_dir / "artifacts" / image_id /
         (std::to_string(segment_index) + "_" + edit_id + ".png");
}

namespace {

ClassDecision ClassifyEdited(const Classifier& classifier, const RasterImage& image,
                             const fs::path& scratch) {
  if (!classifier.NeedsPath()) return classifier.Classify(image, {});
  SavePng(scratch, image);
  ClassDecision d;
  try {
    d = classifier.Classify(image, scratch);
  } catch (...) {
    std::error_code ec;
    fs::remove(scratch, ec);
    throw;
  }
  std::error_code ec;
  fs::remove(scratch, ec);
  return d;
}

}  // namespace

ImageScanResult ScanImage(const DatasetImage& image, const Pipeline& pipeline,
                          const ScanOptions& options, bool check_determinism) {
  ImageScanResult result;
  result.image_id = image.id;
  RasterImage original;
  try {
    original = LoadPng(image.path);
  } catch (const std::exception& e) {
    result.status = ImageStatus::kFailed;
    result.error = e.what();
    return result;
  }
  result.width = original.width();
  result.height = original.height();
  const ImageInput input{image.id, image.path, &original};

  try {
    SegmentationOutput seg = pipeline.segmenter->Run(input);
    for (Segment& s : seg.segments) {
      if (!s.mask.Empty()) result.segments.push_back(std::move(s));
    }
  } catch (const std::exception& e) {
    result.status = ImageStatus::kFailed;
    result.error = Error(ErrorCode::kSegmentationFailed, e.what()).what();
    return result;
  }
  if (result.segments.empty()) {
    result.status = ImageStatus::kSkippedNoSegments;
    return result;
  }

  try {
    result.original_class = pipeline.classifier->Classify(original, image.path).label;
    if (check_determinism) {
      const std::string again =
          pipeline.classifier->Classify(original, image.path).label;
      result.determinism_ok = again == result.original_class;
    }
  } catch (const std::exception& e) {
    result.status = ImageStatus::kFailed;
    result.error = Error(ErrorCode::kClassificationFailed, e.what()).what();
    return result;
  }

  const double pixels = static_cast<double>(original.pixel_count());
  for (std::size_t j = 0; j < result.segments.size(); ++j) {
    const Segment& segment = result.segments[j];
    const int index = static_cast<int>(j);
    const PositionBucket position = BucketForCentroid(MaskCentroid(segment.mask));
    const double area_frac = static_cast<double>(segment.mask.Area()) / pixels;
    for (const auto& editor : pipeline.editors) {
      const std::string& edit_id = editor->spec().edit_id;
      RasterImage edited;
      try {
        edited = editor->Apply(input, segment, index);
      } catch (const std::exception& e) {
        result.failures.push_back({image.id, index, edit_id, "edit",
                                   Error(ErrorCode::kEditFailed, e.what()).what()});
        continue;
      }
      ClassDecision decision;
      try {
        const fs::path scratch = options.run_dir / "work" / image.id /
                                 (std::to_string(index) + "_" + edit_id + ".classify.png");
        decision = ClassifyEdited(*pipeline.classifier, edited, scratch);
      } catch (const std::exception& e) {
        result.failures.push_back(
            {image.id, index, edit_id, "classify",
             Error(ErrorCode::kClassificationFailed, e.what()).what()});
        continue;
      }
      Evaluation ev;
      ev.run_id = options.run_id;
      ev.image_id = image.id;
      ev.segment_index = index;
      ev.segment_label = segment.label;
      ev.edit_id = edit_id;
      ev.position = position;
      ev.area_frac = area_frac;
      ev.original_class = result.original_class;
      ev.edited_class = decision.label;
      ev.ground_truth = image.ground_truth;
      ev.flipped = ev.edited_class != ev.original_class;
      if (ev.flipped) {
        try {
          SavePng(ArtifactPath(options.run_dir, image.id, index, edit_id), edited);
        } catch (const std::exception& e) {
          result.failures.push_back({image.id, index, edit_id, "artifact", e.what()});
        }
      }
      result.evaluations.push_back(std::move(ev));
    }
  }
  SortCanonical(&result.evaluations);
  return result;
}

namespace {

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void WriteText(const fs::path& path, const std::string& text) {
  WriteFileBytes(path, std::vector<uint8_t>(text.begin(), text.end()));
}

}  // namespace

ScanSummary ScanDataset(const Dataset& dataset, const Pipeline& pipeline,
                        const ScanOptions& options) {
  if (dataset.images.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset has no images");
  std::error_code ec;
  fs::create_directories(options.run_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError, "cannot create run directory " +
                                         options.run_dir.string() + ": " + ec.message());
  }

  const std::size_t total = dataset.images.size();
  const bool sample = options.determinism_every > 0 && pipeline.classifier->NeedsPath();
  std::vector<ImageScanResult> results(total);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      const bool check = sample && i % static_cast<std::size_t>(options.determinism_every) == 0;
      results[i] = ScanImage(dataset.images[i], pipeline, options, check);
      const std::size_t d = ++done;
      if (options.progress) {
        std::lock_guard<std::mutex> lock(progress_mu);
        options.progress(d, total);
      }
    }
  };
  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(total)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  fs::remove_all(options.run_dir / "work", ec);

  ScanSummary summary;
  summary.images = static_cast<int>(total);
  std::vector<Evaluation> rows;
  std::string segments_text;
  Json images = Json::array();
  Json failures = Json::array();
  Json mismatches = Json::array();
  int sampled = 0;
  for (const ImageScanResult& r : results) {
    switch (r.status) {
      case ImageStatus::kProcessed: ++summary.processed; break;
      case ImageStatus::kSkippedNoSegments: ++summary.skipped_no_segments; break;
      case ImageStatus::kFailed: ++summary.failed; break;
    }
    Json entry;
    entry["image_id"] = r.image_id;
    entry["status"] = ImageStatusName(r.status);
    entry["segments"] = r.segments.size();
    if (!r.error.empty()) entry["error"] = r.error;
    images.push_back(std::move(entry));
    if (r.status == ImageStatus::kProcessed) {
      Json line;
      line["image_id"] = r.image_id;
      line["width"] = r.width;
      line["height"] = r.height;
      Json segs = Json::array();
      for (const Segment& s : r.segments) segs.push_back(SegmentToJson(s));
      line["segments"] = std::move(segs);
      segments_text += line.dump() + "\n";
    }
    for (const CandidateFailure& f : r.failures) failures.push_back(f.ToJson());
    summary.failed_candidates += static_cast<int64_t>(r.failures.size());
    if (r.determinism_ok) {
      ++sampled;
      if (!*r.determinism_ok) {
        ++summary.determinism_mismatches;
        mismatches.push_back(r.image_id);
      }
    }
    for (const Evaluation& e : r.evaluations) {
      ++summary.evaluations;
      if (e.flipped) ++summary.counterfactuals;
      if (e.flipped || !options.flips_only) rows.push_back(e);
    }
  }
  SortCanonical(&rows);
  WriteEvaluations(options.run_dir / kEvaluationsFile, rows);
  WriteText(options.run_dir / kSegmentsFile, segments_text);

  Json m;
  m["run_id"] = options.run_id;
  m["created"] = UtcTimestamp();
  m["dataset"] = fs::absolute(dataset.root).lexically_normal().string();
  m["config"] = pipeline.config;
  m["segmenter"] = pipeline.segmenter->Describe();
  Json edits = Json::array();
  for (const auto& e : pipeline.editors) edits.push_back(e->spec().ToJson());
  m["edits"] = std::move(edits);
  m["classifier"] = pipeline.classifier->Describe();
  m["flips_only"] = options.flips_only;
  m["workers"] = workers;
  m["simd"] = simd::ActiveKernels().name;
  Json tools = Json::array();
  for (const auto& [role, pool] : pipeline.tools) {
    Json t = pool->info().ToJson();
    t["role"] = role;
    t["command"] = pool->command().ToJson();
    t["restarts"] = pool->restarts();
    tools.push_back(std::move(t));
  }
  m["tools"] = std::move(tools);
  m["image_count"] = summary.images;
  m["counts"] = {{"processed", summary.processed},
                 {"skipped-no-segments", summary.skipped_no_segments},
                 {"failed", summary.failed}};
  m["evaluation_count"] = summary.evaluations;
  m["counterfactual_count"] = summary.counterfactuals;
  m["failed_candidate_count"] = summary.failed_candidates;
  if (sample) {
    m["determinism_check"] = {{"every", options.determinism_every},
                              {"sampled", sampled},
                              {"mismatches", mismatches}};
  }
  m["images"] = std::move(images);
  m["failed_candidates"] = std::move(failures);
  WriteText(options.run_dir / kManifestFile, m.dump(2) + "\n");
  summary.manifest = std::move(m);
  return summary;
}

}  // namespace cofscan
