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

#include "cofscan/serveapi.h"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "httplib.h"

#include "cofscan/cfsearch.h"
#include "cofscan/error.h"
#include "cofscan/segmenters.h"

namespace cofscan {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> Single(const QueryParams& params, const std::string& name) {
  const auto [lo, hi] = params.equal_range(name);
  if (lo == hi) return std::nullopt;
  if (std::next(lo) != hi) throw CofRequestError(name, "given more than once");
  return lo->second;
}

bool ParseBoolParam(const std::string& name, const std::string& v) {
  if (v.empty() || v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw CofRequestError(name, "expected true or false, got '" + v + "'");
}

int64_t ParseIntParam(const std::string& name, const std::string& v) {
  int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw CofRequestError(name, "expected an integer, got '" + v + "'");
  }
  return out;
}

double ParseDoubleParam(const std::string& name, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw CofRequestError(name, "expected a number, got '" + v + "'");
  }
  return d;
}

PositionBucket ParsePositionParam(const std::string& name, const std::string& v) {
  try {
    return ParsePosition(v);
  } catch (const Error&) {
    throw CofRequestError(name, "unknown position '" + v + "'");
  }
}

void RejectUnknown(const QueryParams& params, const std::set<std::string>& known) {
  for (const auto& [k, v] : params) {
    if (!known.count(k)) throw CofRequestError(k, "unknown parameter");
  }
}

ApiResponse JsonResponse(int status, const Json& body) {
  ApiResponse r;
  r.status = status;
  r.body = body.dump(2) + "\n";
  return r;
}

ApiResponse ErrorResponse(int status, const std::string& message,
                          const std::string& param = "") {
  Json j;
  j["error"] = message;
  if (!param.empty()) j["parameter"] = param;
  return JsonResponse(status, j);
}

ApiResponse PngResponse(std::vector<uint8_t> bytes) {
  ApiResponse r;
  r.content_type = "image/png";
  r.body.assign(bytes.begin(), bytes.end());
  return r;
}

std::vector<std::string> SplitPath(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

}  // namespace

CofRequest CofRequestFromParams(const QueryParams& params) {
  RejectUnknown(params, {"mode", "class", "position", "misclassified_only",
                         "corrected_only", "min_support", "min_frequency", "top_k",
                         "by_class", "by_position", "edit"});
  CofRequest r;
  if (auto v = Single(params, "mode")) {
    try {
      r.query.mode = ParseCofMode(*v);
    } catch (const Error&) {
      throw CofRequestError("mode", "unknown mode '" + *v + "'");
    }
    r.mode_set = true;
  }
  if (auto v = Single(params, "class")) r.query.class_filter = *v;
  if (auto v = Single(params, "position")) r.query.position = ParsePositionParam("position", *v);
  if (auto v = Single(params, "misclassified_only")) {
    r.query.misclassified_only = ParseBoolParam("misclassified_only", *v);
  }
  if (auto v = Single(params, "corrected_only")) {
    r.query.corrected_only = ParseBoolParam("corrected_only", *v);
  }
  if (auto v = Single(params, "min_support")) {
    const int64_t n = ParseIntParam("min_support", *v);
    if (n < 0 || n > INT32_MAX) throw CofRequestError("min_support", "must be >= 0");
    r.query.min_support = static_cast<int>(n);
  }
  if (auto v = Single(params, "min_frequency")) {
    r.query.min_frequency = ParseDoubleParam("min_frequency", *v);
  }
  if (auto v = Single(params, "top_k")) {
    const int64_t n = ParseIntParam("top_k", *v);
    if (n < 1 || n > INT32_MAX) throw CofRequestError("top_k", "must be >= 1");
    r.query.top_k = static_cast<int>(n);
  }
  if (auto v = Single(params, "by_class")) r.by_class = ParseBoolParam("by_class", *v);
  if (auto v = Single(params, "by_position")) r.by_position = *v;
  if (auto v = Single(params, "edit")) r.query.edit_id = *v;
  return r;
}

RasterImage RenderOverlay(const RasterImage& image, const PixelMask& mask, Rgb tint) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "overlay mask does not match image");
  }
  RasterImage out = image;
  const Bitmap bits = RleDecode(mask);
  auto blend = [](uint8_t a, uint8_t b) {
    return static_cast<uint8_t>((static_cast<int>(a) + b + 1) / 2);
  };
  for (std::size_t i = 0; i < bits.bits.size(); ++i) {
    if (!bits.bits[i]) continue;
    const Rgb c = image.at(i);
    out.set(i, Rgb{blend(c.r, tint.r), blend(c.g, tint.g), blend(c.b, tint.b)});
  }
  return out;
}

LoadedRun LoadedRun::Load(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, dir.string() + " is not a directory");
  }
  if (!fs::exists(dir / kEvaluationsFile)) {
    throw Error(ErrorCode::kIoError, "no " + std::string(kEvaluationsFile) + " in " + dir.string());
  }
  LoadedRun run;
  run.dir = dir;
  run.evaluations = LoadEvaluationSet(dir);
  if (fs::exists(dir / kManifestFile)) {
    std::ifstream in(dir / kManifestFile);
    run.manifest = Json::parse(in, nullptr, false);
    if (run.manifest.is_discarded() || !run.manifest.is_object()) {
      throw Error(ErrorCode::kInvalidArgument, "corrupt manifest in " + dir.string());
    }
    if (run.manifest.contains("dataset") && run.manifest["dataset"].is_string()) {
      run.dataset = run.manifest["dataset"].get<std::string>();
    }
    if (run.manifest.contains("images") && run.manifest["images"].is_array()) {
      for (const Json& e : run.manifest["images"]) {
        run.image_status[e.value("image_id", "")] = e.value("status", "");
      }
    }
  }
  run.run_id = run.evaluations.run_id;
  if (run.run_id.empty()) run.run_id = run.manifest.value("run_id", "");
  if (run.run_id.empty()) run.run_id = fs::absolute(dir).lexically_normal().filename().string();
  if (fs::exists(dir / kSegmentsFile)) {
    std::ifstream in(dir / kSegmentsFile);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const Json j = Json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        throw Error(ErrorCode::kInvalidArgument, "corrupt " + std::string(kSegmentsFile));
      }
      std::vector<PixelMask> masks;
      for (const Json& s : j.at("segments")) masks.push_back(MaskFromJson(s.at("mask")));
      run.segments[j.at("image_id").get<std::string>()] = std::move(masks);
    }
  }
  return run;
}

Json LoadedRun::Summary() const {
  std::set<std::string> images, classes, labels;
  int64_t flips = 0;
  for (const Evaluation& e : evaluations.rows) {
    images.insert(e.image_id);
    classes.insert(e.original_class);
    labels.insert(e.segment_label);
    if (e.flipped) ++flips;
  }
  Json j;
  j["run_id"] = run_id;
  j["image_count"] = images.size();
  j["evaluation_count"] = evaluations.rows.size();
  j["counterfactual_count"] = flips;
  j["classes"] = classes;
  j["labels"] = labels;
  j["flips_only"] = evaluations.flips_only;
  j["has_ground_truth"] = evaluations.HasGroundTruth();
  Json excerpt = Json::object();
  for (const char* key : {"created", "dataset", "segmenter", "classifier", "edits",
                          "image_count", "counts", "simd"}) {
    if (manifest.contains(key)) excerpt[key] = manifest[key];
  }
  j["manifest"] = std::move(excerpt);
  return j;
}

ResultsApi::ResultsApi(const std::vector<fs::path>& run_dirs) {
  if (run_dirs.empty()) throw Error(ErrorCode::kInvalidArgument, "no run directories");
  for (const fs::path& dir : run_dirs) {
    LoadedRun run = LoadedRun::Load(dir);
    const std::string id = run.run_id;
    if (!runs_.emplace(id, std::move(run)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate run id '" + id + "'");
    }
  }
}

std::vector<std::string> ResultsApi::run_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, run] : runs_) ids.push_back(id);
  return ids;
}

ApiResponse ResultsApi::Get(const std::string& path, const QueryParams& params) const {
  const std::vector<std::string> parts = SplitPath(path);
  if (parts.size() < 2 || parts[0] != "api" || parts[1] != "runs") {
    return ErrorResponse(404, "not found");
  }
  if (parts.size() == 2) return Runs();
  const auto it = runs_.find(parts[2]);
  if (it == runs_.end()) return ErrorResponse(404, "unknown run '" + parts[2] + "'");
  const LoadedRun& run = it->second;
  if (parts.size() == 3) return JsonResponse(200, run.Summary());
  if (parts.size() == 4 && parts[3] == "cof") return Cof(run, params);
  if (parts.size() == 4 && parts[3] == "records") return Records(run, params);
  if (parts.size() >= 6 && parts[3] == "images") return Image(run, parts);
  return ErrorResponse(404, "not found");
}

ApiResponse ResultsApi::Runs() const {
  Json list = Json::array();
  for (const auto& [id, run] : runs_) list.push_back(run.Summary());
  return JsonResponse(200, list);
}

ApiResponse ResultsApi::Cof(const LoadedRun& run, const QueryParams& params) const {
  try {
    return JsonResponse(200, CofRequestJson(run.evaluations, CofRequestFromParams(params)));
  } catch (const CofRequestError& e) {
    return ErrorResponse(400, e.what(), e.param());
  }
}

ApiResponse ResultsApi::Records(const LoadedRun& run, const QueryParams& params) const {
  std::optional<std::string> label, cls, edit;
  std::optional<PositionBucket> position;
  std::optional<bool> flipped;
  int64_t offset = 0, limit = 100;
  try {
    RejectUnknown(params, {"label", "position", "class", "flipped", "edit", "offset", "limit"});
    label = Single(params, "label");
    cls = Single(params, "class");
    edit = Single(params, "edit");
    if (auto v = Single(params, "position")) position = ParsePositionParam("position", *v);
    if (auto v = Single(params, "flipped")) flipped = ParseBoolParam("flipped", *v);
    if (auto v = Single(params, "offset")) {
      offset = ParseIntParam("offset", *v);
      if (offset < 0) throw CofRequestError("offset", "must be >= 0");
    }
    if (auto v = Single(params, "limit")) {
      limit = ParseIntParam("limit", *v);
      if (limit < 1 || limit > 1000) throw CofRequestError("limit", "must be in 1..1000");
    }
  } catch (const CofRequestError& e) {
    return ErrorResponse(400, e.what(), e.param());
  }
  int64_t total = 0;
  Json page = Json::array();
  for (const Evaluation& e : run.evaluations.rows) {
    if (label && e.segment_label != *label) continue;
    if (cls && e.original_class != *cls) continue;
    if (edit && e.edit_id != *edit) continue;
    if (position && e.position != *position) continue;
    if (flipped && e.flipped != *flipped) continue;
    if (total >= offset && total < offset + limit) page.push_back(EvaluationToJson(e));
    ++total;
  }
  Json body;
  body["total"] = total;
  body["offset"] = offset;
  body["limit"] = limit;
  body["records"] = std::move(page);
  ApiResponse r = JsonResponse(200, body);
  r.headers.emplace_back("X-Total-Count", std::to_string(total));
  return r;
}

ApiResponse ResultsApi::Image(const LoadedRun& run, const std::vector<std::string>& parts) const {
  // parts: api runs {id} images {image_id} {variant...}
  const std::string& image_id = parts[4];
  const std::string& variant = parts[5];
  const bool known = run.image_status.count(image_id) || run.segments.count(image_id);
  if (!known) return ErrorResponse(404, "unknown image '" + image_id + "'");
  const fs::path original = run.dataset / "images" / (image_id + ".png");
  try {
    if (variant == "original" && parts.size() == 6) {
      if (run.dataset.empty() || !fs::exists(original)) {
        return ErrorResponse(404, "original image not available");
      }
      return PngResponse(ReadFileBytes(original));
    }
    if (variant == "overlay" && parts.size() == 7) {
      const auto seg = run.segments.find(image_id);
      int64_t index = -1;
      try {
        index = ParseIntParam("segment_index", parts[6]);
      } catch (const CofRequestError&) {
        return ErrorResponse(404, "bad segment index");
      }
      if (seg == run.segments.end() || index < 0 ||
          index >= static_cast<int64_t>(seg->second.size())) {
        return ErrorResponse(404, "unknown segment");
      }
      if (run.dataset.empty() || !fs::exists(original)) {
        return ErrorResponse(404, "original image not available");
      }
      return PngResponse(EncodePng(RenderOverlay(LoadPng(original), seg->second[index])));
    }
    if (variant == "edited" && parts.size() == 8) {
      for (const Evaluation& e : run.evaluations.rows) {
        if (e.image_id != image_id || std::to_string(e.segment_index) != parts[6] ||
            e.edit_id != parts[7]) {
          continue;
        }
        if (!e.flipped) return ErrorResponse(404, "edited image not persisted (no flip)");
        const fs::path artifact = ArtifactPath(run.dir, image_id, e.segment_index, e.edit_id);
        if (!fs::exists(artifact)) return ErrorResponse(404, "artifact missing");
        return PngResponse(ReadFileBytes(artifact));
      }
      return ErrorResponse(404, "unknown candidate");
    }
  } catch (const std::exception& e) {
    return ErrorResponse(500, e.what());
  }
  return ErrorResponse(404, "unknown variant");
}

struct ResultsServer::Impl {
  std::shared_ptr<const ResultsApi> api;
  httplib::Server server;
};

ResultsServer::ResultsServer(std::shared_ptr<const ResultsApi> api)
    : impl_(std::make_unique<Impl>()) {
  impl_->api = std::move(api);
  impl_->server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  const ResultsApi* raw = impl_->api.get();
  impl_->server.Get(R"(/api(/.*)?)", [raw](const httplib::Request& req, httplib::Response& res) {
    QueryParams params(req.params.begin(), req.params.end());
    const ApiResponse r = raw->Get(req.path, params);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, r.content_type);
  });
  impl_->server.Options(R"(/api(/.*)?)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Expose-Headers", "X-Total-Count");
    res.status = 204;
  });
  impl_->server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Expose-Headers", "X-Total-Count");
  });
}

ResultsServer::~ResultsServer() = default;

int ResultsServer::Bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ResultsServer::Listen() { return impl_->server.listen_after_bind(); }

void ResultsServer::Stop() { impl_->server.stop(); }

}  // namespace cofscan
