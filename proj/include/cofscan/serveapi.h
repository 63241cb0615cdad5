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

#ifndef COFSCAN_SERVEAPI_H_
#define COFSCAN_SERVEAPI_H_

// Read-only HTTP API over completed runs.
//
//   GET /api/runs
//   GET /api/runs/{id}
//   GET /api/runs/{id}/cof?mode&class&position&misclassified_only&...
//   GET /api/runs/{id}/records?label&position&class&flipped&edit&offset&limit
//   GET /api/runs/{id}/images/{image_id}/original
//   GET /api/runs/{id}/images/{image_id}/overlay/{segment_index}
//   GET /api/runs/{id}/images/{image_id}/edited/{segment_index}/{edit_id}

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cofscan/cof.h"
#include "cofscan/evaluation.h"
#include "cofscan/image.h"
#include "cofscan/json.h"
#include "cofscan/mask.h"

namespace cofscan {

using QueryParams = std::multimap<std::string, std::string>;

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

// Builds a CofRequest from API query parameters. Throws CofRequestError
// naming the bad parameter.
CofRequest CofRequestFromParams(const QueryParams& params);

// Half-and-half blend of `tint` over the masked pixels, rounded half up.
RasterImage RenderOverlay(const RasterImage& image, const PixelMask& mask,
                          Rgb tint = {255, 0, 0});

struct LoadedRun {
  std::string run_id;
  std::filesystem::path dir;
  std::filesystem::path dataset;  // empty when the manifest does not name one
  Json manifest = Json::object();
  EvaluationSet evaluations;
  std::map<std::string, std::vector<PixelMask>> segments;  // from segments.jsonl
  std::map<std::string, std::string> image_status;         // from the manifest

  // Throws IoError / InvalidArgument for an unusable run directory.
  static LoadedRun Load(const std::filesystem::path& dir);
  Json Summary() const;
};

class ResultsApi {
 public:
  // Throws for unusable directories, duplicate run ids, or an empty list.
  explicit ResultsApi(const std::vector<std::filesystem::path>& run_dirs);

  ApiResponse Get(const std::string& path, const QueryParams& params) const;
  std::vector<std::string> run_ids() const;

 private:
  ApiResponse Runs() const;
  ApiResponse Cof(const LoadedRun& run, const QueryParams& params) const;
  ApiResponse Records(const LoadedRun& run, const QueryParams& params) const;
  ApiResponse Image(const LoadedRun& run, const std::vector<std::string>& parts) const;

  std::map<std::string, LoadedRun> runs_;
};

// cpp-httplib front end for a ResultsApi.
class ResultsServer {
 public:
  explicit ResultsServer(std::shared_ptr<const ResultsApi> api);
  ~ResultsServer();

  // Returns the bound port (an ephemeral one when `port` is 0), or -1.
  int Bind(const std::string& host, int port);
  // Blocks until Stop().
  bool Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cofscan

#endif  // COFSCAN_SERVEAPI_H_
