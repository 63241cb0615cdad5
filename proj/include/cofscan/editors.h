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

#ifndef COFSCAN_EDITORS_H_
#define COFSCAN_EDITORS_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cofscan/image.h"
#include "cofscan/json.h"
#include "cofscan/mask.h"
#include "cofscan/segmenters.h"
#include "cofscan/simd/kernels.h"
#include "cofscan/toolproto.h"

namespace cofscan {

enum class EditKind { kGaussianBlur, kSolidFill, kMeanFill, kExternalInfill };

std::string_view EditKindName(EditKind kind);

// Fill with the palette entry `step` places after the segment's dominant
// colour. This is the "shift to the next class colour" edit.
struct PaletteShift {
  std::vector<Rgb> palette;
  int step = 1;
};

struct EditSpec {
  std::string edit_id;
  EditKind kind = EditKind::kGaussianBlur;
  std::optional<double> sigma;  // blur; default derived from image size
  std::optional<Rgb> color;     // solid_fill
  std::optional<PaletteShift> palette_shift;  // solid_fill alternative
  std::optional<std::string> prompt;          // external_infill
  std::optional<ToolCommand> tool;            // external_infill

  Json ToJson() const;
  // Throws ConfigError.
  static EditSpec FromJson(const Json& j);
};

// Normalized discrete Gaussian, radius ceil(3 sigma).
std::vector<float> GaussianKernel(double sigma);

// max(width, height) / 20, at least 2 px.
double DefaultBlurSigma(int width, int height);

// Full-image separable blur (clamp-to-edge, rounded to nearest), composited
// into the input only where the mask is set.
RasterImage EditGaussianBlur(
    const RasterImage& image, const PixelMask& mask, double sigma,
    const simd::KernelTable& kernels = simd::ActiveKernels());

// The blur alone, without compositing.
RasterImage GaussianBlurImage(
    const RasterImage& image, double sigma,
    const simd::KernelTable& kernels = simd::ActiveKernels());

RasterImage EditSolidFill(
    const RasterImage& image, const PixelMask& mask, Rgb color,
    const simd::KernelTable& kernels = simd::ActiveKernels());

// Masked pixels become the per-channel mean (rounded half-up) of the masked
// input pixels. Throws EmptyMask.
RasterImage EditMeanFill(const RasterImage& image, const PixelMask& mask);

// Throws EditFailed when the segment's dominant colour is not in the palette.
Rgb ResolvePaletteShift(const RasterImage& image, const PixelMask& mask,
                        const PaletteShift& shift);

// One protocol "infill" round trip. The tool writes its result to `out_path`,
// which is read back and checked against the input dimensions.
RasterImage EditExternalInfill(ToolPool& tool,
                               const std::filesystem::path& image_path,
                               const PixelMask& mask,
                               const std::optional<std::string>& prompt,
                               const std::filesystem::path& out_path);

class Editor {
 public:
  virtual ~Editor() = default;
  virtual const EditSpec& spec() const = 0;
  virtual RasterImage Apply(const ImageInput& input, const Segment& segment,
                            int segment_index) const = 0;
};

// `work_dir` receives external infill outputs; `tool` must be set for
// external_infill specs.
std::unique_ptr<Editor> MakeEditor(EditSpec spec,
                                   std::filesystem::path work_dir = {},
                                   std::shared_ptr<ToolPool> tool = nullptr);

}  // namespace cofscan

#endif  // COFSCAN_EDITORS_H_
