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

#include "cofscan/editors.h"

#include <cmath>
#include <unordered_map>

#include "cofscan/error.h"

namespace cofscan {

std::string_view EditKindName(EditKind kind) {
  switch (kind) {
    case EditKind::kGaussianBlur: return "gaussian_blur";
    case EditKind::kSolidFill: return "solid_fill";
    case EditKind::kMeanFill: return "mean_fill";
    case EditKind::kExternalInfill: return "external_infill";
  }
  return "gaussian_blur";
}

namespace {

void CheckDimensions(const RasterImage& image, const PixelMask& mask) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask " + std::to_string(mask.width()) + "x" +
                    std::to_string(mask.height()) + " vs image " +
                    std::to_string(image.width()) + "x" +
                    std::to_string(image.height()));
  }
}

}  // namespace

Json EditSpec::ToJson() const {
  Json j;
  j["id"] = edit_id;
  j["kind"] = EditKindName(kind);
  if (sigma) j["sigma"] = *sigma;
  if (color) j["color"] = RgbToJson(*color);
  if (palette_shift) {
    Json p = Json::array();
    for (Rgb c : palette_shift->palette) p.push_back(RgbToJson(c));
    j["palette_shift"] = {{"palette", p}, {"step", palette_shift->step}};
  }
  if (prompt) j["prompt"] = *prompt;
  if (tool) j["tool"] = tool->ToJson();
  return j;
}

EditSpec EditSpec::FromJson(const Json& j) {
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
      !j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorCode::kConfigError, "edit needs string \"id\" and \"kind\"");
  }
  EditSpec s;
  s.edit_id = j["id"].get<std::string>();
  if (s.edit_id.empty()) throw Error(ErrorCode::kConfigError, "edit id is empty");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "gaussian_blur") {
    s.kind = EditKind::kGaussianBlur;
    if (j.contains("sigma")) {
      s.sigma = j["sigma"].get<double>();
      if (!(*s.sigma > 0.0)) throw Error(ErrorCode::kConfigError, "sigma must be > 0");
    }
  } else if (kind == "solid_fill") {
    s.kind = EditKind::kSolidFill;
    if (j.contains("color")) s.color = RgbFromJson(j["color"]);
    if (j.contains("palette_shift")) {
      const Json& p = j["palette_shift"];
      PaletteShift shift;
      for (const auto& c : p.at("palette")) shift.palette.push_back(RgbFromJson(c));
      if (p.contains("step")) shift.step = p["step"].get<int>();
      if (shift.palette.empty()) {
        throw Error(ErrorCode::kConfigError, "palette_shift palette is empty");
      }
      s.palette_shift = std::move(shift);
    }
    if (s.color.has_value() == s.palette_shift.has_value()) {
      throw Error(ErrorCode::kConfigError,
                  "solid_fill needs exactly one of \"color\" or \"palette_shift\"");
    }
  } else if (kind == "mean_fill") {
    s.kind = EditKind::kMeanFill;
  } else if (kind == "external_infill") {
    s.kind = EditKind::kExternalInfill;
    if (!j.contains("tool")) {
      throw Error(ErrorCode::kConfigError, "external_infill needs a \"tool\"");
    }
    s.tool = ToolCommand::FromJson(j["tool"]);
    if (j.contains("prompt") && j["prompt"].is_string()) {
      s.prompt = j["prompt"].get<std::string>();
    }
  } else {
    throw Error(ErrorCode::kConfigError, "unknown edit kind '" + kind + "'");
  }
  return s;
}

std::vector<float> GaussianKernel(double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-(k * k) / (2.0 * sigma * sigma));
    w[static_cast<std::size_t>(k + radius)] = v;
    total += v;
  }
  std::vector<float> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = static_cast<float>(w[i] / total);
  return out;
}

double DefaultBlurSigma(int width, int height) {
  return std::max(static_cast<double>(std::max(width, height)) / 20.0, 2.0);
}

RasterImage GaussianBlurImage(const RasterImage& image, double sigma,
                              const simd::KernelTable& kernels) {
  const std::vector<float> weights = GaussianKernel(sigma);
  const int w = image.width();
  const int h = image.height();
  const std::size_t n = image.pixel_count();
  std::vector<float> plane(n);
  std::vector<float> tmp(n);
  std::vector<float> blurred(n);
  std::vector<uint8_t> quantized(n);
  std::vector<uint8_t> out(n * 3);
  const auto src = image.bytes();
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) plane[i] = src[i * 3 + c];
    kernels.convolve_rows(plane, tmp, w, h, weights);
    kernels.convolve_cols(tmp, blurred, w, h, weights);
    kernels.quantize_u8(blurred, quantized);
    for (std::size_t i = 0; i < n; ++i) out[i * 3 + c] = quantized[i];
  }
  return RasterImage(w, h, std::move(out));
}

RasterImage EditGaussianBlur(const RasterImage& image, const PixelMask& mask,
                             double sigma, const simd::KernelTable& kernels) {
  CheckDimensions(image, mask);
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be > 0");
  if (mask.Empty()) return image;
  const RasterImage blurred = GaussianBlurImage(image, sigma, kernels);
  const std::vector<uint8_t> selector = ExpandToRgbSelector(mask);
  std::vector<uint8_t> out(image.bytes().size());
  kernels.select_bytes(blurred.bytes(), image.bytes(), selector, out);
  return RasterImage(image.width(), image.height(), std::move(out));
}

RasterImage EditSolidFill(const RasterImage& image, const PixelMask& mask,
                          Rgb color, const simd::KernelTable& kernels) {
  CheckDimensions(image, mask);
  const RasterImage fill(image.width(), image.height(), color);
  const std::vector<uint8_t> selector = ExpandToRgbSelector(mask);
  std::vector<uint8_t> out(image.bytes().size());
  kernels.select_bytes(fill.bytes(), image.bytes(), selector, out);
  return RasterImage(image.width(), image.height(), std::move(out));
}

RasterImage EditMeanFill(const RasterImage& image, const PixelMask& mask) {
  CheckDimensions(image, mask);
  const Bitmap bits = RleDecode(mask);
  uint64_t sums[3] = {0, 0, 0};
  uint64_t count = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!bits.bits[i]) continue;
    const Rgb c = image.at(i);
    sums[0] += c.r;
    sums[1] += c.g;
    sums[2] += c.b;
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::kEmptyMask, "mean fill of an empty mask");
  auto mean = [count](uint64_t s) {
    return static_cast<uint8_t>((2 * s + count) / (2 * count));
  };
  const Rgb fill{mean(sums[0]), mean(sums[1]), mean(sums[2])};
  RasterImage out = image;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits.bits[i]) out.set(i, fill);
  }
  return out;
}

Rgb ResolvePaletteShift(const RasterImage& image, const PixelMask& mask,
                        const PaletteShift& shift) {
  CheckDimensions(image, mask);
  const Bitmap bits = RleDecode(mask);
  std::unordered_map<uint32_t, uint32_t> histogram;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits.bits[i]) ++histogram[image.at(i).Packed()];
  }
  if (histogram.empty()) throw Error(ErrorCode::kEmptyMask, "palette shift of an empty mask");
  uint32_t best = 0;
  uint32_t best_count = 0;
  for (const auto& [color, count] : histogram) {
    if (count > best_count || (count == best_count && color < best)) {
      best = color;
      best_count = count;
    }
  }
  const Rgb dominant = Rgb::FromPacked(best);
  const int n = static_cast<int>(shift.palette.size());
  for (int i = 0; i < n; ++i) {
    if (shift.palette[static_cast<std::size_t>(i)] == dominant) {
      const int target = ((i + shift.step) % n + n) % n;
      return shift.palette[static_cast<std::size_t>(target)];
    }
  }
  throw Error(ErrorCode::kEditFailed,
              "segment colour " + ToString(dominant) + " is not in the palette");
}

RasterImage EditExternalInfill(ToolPool& tool,
                               const std::filesystem::path& image_path,
                               const PixelMask& mask,
                               const std::optional<std::string>& prompt,
                               const std::filesystem::path& out_path) {
  if (out_path.has_parent_path()) {
    std::filesystem::create_directories(out_path.parent_path());
  }
  ToolRequest req;
  req.op = "infill";
  req.image_path = image_path.string();
  req.mask = mask;
  req.prompt = prompt;
  req.out_path = out_path.string();
  const ToolResponse resp = tool.Call(std::move(req));
  std::filesystem::path written = out_path;
  if (resp.payload.contains("out_path") && resp.payload["out_path"].is_string()) {
    written = resp.payload["out_path"].get<std::string>();
  }
  RasterImage result = LoadPng(written);
  if (result.width() != mask.width() || result.height() != mask.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "infill result is " + std::to_string(result.width()) + "x" +
                    std::to_string(result.height()) + ", expected " +
                    std::to_string(mask.width()) + "x" +
                    std::to_string(mask.height()));
  }
  return result;
}

namespace {

class BuiltinEditor : public Editor {
 public:
  explicit BuiltinEditor(EditSpec spec) : spec_(std::move(spec)) {}
  const EditSpec& spec() const override { return spec_; }

  RasterImage Apply(const ImageInput& input, const Segment& segment,
                    int) const override {
    const RasterImage& image = *input.image;
    switch (spec_.kind) {
      case EditKind::kGaussianBlur:
        return EditGaussianBlur(
            image, segment.mask,
            spec_.sigma.value_or(DefaultBlurSigma(image.width(), image.height())));
      case EditKind::kSolidFill: {
        const Rgb color = spec_.color ? *spec_.color
                                      : ResolvePaletteShift(image, segment.mask,
                                                            *spec_.palette_shift);
        return EditSolidFill(image, segment.mask, color);
      }
      case EditKind::kMeanFill:
        return EditMeanFill(image, segment.mask);
      case EditKind::kExternalInfill:
        break;
    }
    throw Error(ErrorCode::kEditFailed, "not a built-in edit");
  }

 private:
  EditSpec spec_;
};

class InfillEditor : public Editor {
 public:
  InfillEditor(EditSpec spec, std::filesystem::path work_dir,
               std::shared_ptr<ToolPool> tool)
      : spec_(std::move(spec)), work_dir_(std::move(work_dir)), tool_(std::move(tool)) {}
  const EditSpec& spec() const override { return spec_; }

  RasterImage Apply(const ImageInput& input, const Segment& segment,
                    int segment_index) const override {
    const auto out = work_dir_ / input.id /
                     (std::to_string(segment_index) + "_" + spec_.edit_id + ".png");
    return EditExternalInfill(*tool_, input.path, segment.mask, spec_.prompt, out);
  }

 private:
  EditSpec spec_;
  std::filesystem::path work_dir_;
  std::shared_ptr<ToolPool> tool_;
};

}  // namespace

std::unique_ptr<Editor> MakeEditor(EditSpec spec, std::filesystem::path work_dir,
                                   std::shared_ptr<ToolPool> tool) {
  if (spec.kind == EditKind::kExternalInfill) {
    if (tool == nullptr) {
      throw Error(ErrorCode::kConfigError,
                  "external_infill edit '" + spec.edit_id + "' has no tool");
    }
    return std::make_unique<InfillEditor>(std::move(spec), std::move(work_dir),
                                          std::move(tool));
  }
  return std::make_unique<BuiltinEditor>(std::move(spec));
}

}  // namespace cofscan
