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

#ifndef COFSCAN_TESTS_SUPPORT_TEST_SUPPORT_H_
#define COFSCAN_TESTS_SUPPORT_TEST_SUPPORT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cofscan/cfsearch.h"
#include "cofscan/cof.h"
#include "cofscan/evaluation.h"
#include "cofscan/image.h"
#include "cofscan/mask.h"

namespace cofscan::testing {

// Removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}
  int Int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(gen_() % (static_cast<uint64_t>(hi - lo) + 1));
  }
  double Unit() { return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0); }
  bool Coin(double p) { return Unit() < p; }
  uint64_t Raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

Bitmap RandomBitmap(Rng& rng, int w, int h, double density);
// Blobby masks: a few random rectangles.
Bitmap RandomRectsBitmap(Rng& rng, int w, int h);
RasterImage RandomImage(Rng& rng, int w, int h);

struct EvaluationGenSpec {
  int rows = 200;
  int labels = 8;
  int images = 40;
  int classes = 3;
  int edits = 2;
  bool ground_truth = true;
  double flip_rate = 0.3;
};
std::vector<Evaluation> RandomEvaluations(Rng& rng, const EvaluationGenSpec& spec);

// ---- oracles ----------------------------------------------------------------

// Table recomputed from raw evaluations-file lines in one pass, following the
// written mode definitions directly.
struct OracleRow {
  std::string label;
  int64_t count = 0;
  double frequency = 0.0;
  int64_t support = 0;
};
struct OracleTable {
  std::vector<OracleRow> rows;
  int64_t total_counterfactuals = 0;
  int64_t total_images = 0;
};
// An evaluations-file line read with plain JSON access, no library types.
struct RawRow {
  std::string image, label, position, edit, orig, edited;
  std::optional<std::string> gt;
  bool flipped = false;
};
std::vector<RawRow> ParseRaw(const std::vector<std::string>& lines);

OracleTable RecountCof(const std::vector<std::string>& lines, const CofQuery& query);
OracleTable RecountCof(const std::vector<RawRow>& rows, const CofQuery& query);
// Position table for one label, keyed by bucket name.
OracleTable RecountPositions(const std::vector<std::string>& lines, const std::string& label,
                             const CofQuery& query);
OracleTable RecountPositions(const std::vector<RawRow>& rows, const std::string& label,
                             const CofQuery& query);
std::vector<std::string> Lines(const std::string& text);

// Draws a query whose filter values come from `rows` most of the time.
CofQuery RandomQuery(Rng& rng, const std::vector<Evaluation>& rows, bool allow_ground_truth);
// Empty when equal: counts exact, frequencies within `tol`.
std::string CompareTables(const CofTable& got, const OracleTable& want, double tol);

// Mean of set-pixel centres by enumeration.
std::pair<double, double> EnumeratedCentroid(const Bitmap& bits);
// Per-pixel NOR of the inputs.
Bitmap PixelNor(const std::vector<Bitmap>& inputs, int w, int h);
// 2-D Gaussian by direct double-precision summation over the truncated
// window, clamp-to-edge, without rounding.
std::vector<double> DirectBlur(const RasterImage& image, double sigma);

// Path of the protocol fixture tool.
std::string FakeToolPath();

// Loads `config` (paths resolved against /), builds the pipeline and scans.
ScanSummary RunScanConfig(const Json& config, int workers = 1);

}  // namespace cofscan::testing

#endif  // COFSCAN_TESTS_SUPPORT_TEST_SUPPORT_H_
