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

#include "cofscan/datasets.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "cofscan/error.h"
#include "cofscan/mask.h"
#include "cofscan/segmenters.h"

namespace cofscan {

namespace fs = std::filesystem;

namespace {

uint64_t SplitMix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSeed(uint64_t seed, uint64_t a, uint64_t b) {
  return SplitMix(SplitMix(SplitMix(seed) ^ a) ^ b);
}

// Uniform integer in [lo, hi]. Avoids std distributions, whose output is
// implementation-defined.
int Uniform(std::mt19937_64& rng, int lo, int hi) {
  const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

std::string PaddedId(const std::string& prefix, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d", index);
  return prefix + buf;
}

void PrepareOutDir(const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  if (ec) {
    throw Error(ErrorCode::kIoError, "cannot create " + (out_dir / "images").string() +
                                         ": " + ec.message());
  }
}

std::string Trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

}  // namespace

std::vector<Rgb> DefaultPalette() {
  return {
      {255, 140, 0},   {0, 100, 0},     {255, 0, 0},    {0, 255, 0},
      {138, 43, 226},  {233, 150, 122}, {0, 255, 255},  {255, 255, 84},
      {100, 149, 237}, {255, 20, 147},
  };
}

LabelList ReadLabelsCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  LabelList out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = Trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, path.string() + ": expected id,class");
    }
    std::string id = Trim(line.substr(0, comma));
    std::string cls = Trim(line.substr(comma + 1));
    if (first && id == "id") {
      first = false;
      continue;
    }
    first = false;
    out.emplace_back(std::move(id), std::move(cls));
  }
  return out;
}

void WriteLabelsCsv(const fs::path& path, const LabelList& labels) {
  std::string text = "id,class\n";
  for (const auto& [id, cls] : labels) text += id + "," + cls + "\n";
  WriteFileBytes(path, std::vector<uint8_t>(text.begin(), text.end()));
}

Json DatasetSummary::ToJson() const {
  Json j;
  j["images"] = images;
  j["per_class"] = per_class;
  j["watermarked"] = watermarked;
  j["watermarks_per_corner"] = watermarks_per_corner;
  return j;
}

GrayImage SyntheticGlyph(int digit, int index, uint64_t seed) {
  constexpr int kSize = 28;
  GrayImage g{kSize, kSize, std::vector<uint8_t>(kSize * kSize, 0)};
  std::mt19937_64 rng(DeriveSeed(seed, static_cast<uint64_t>(digit),
                                 static_cast<uint64_t>(index)));
  const int strokes = Uniform(rng, 2, 4);
  for (int s = 0; s < strokes; ++s) {
    const int x0 = Uniform(rng, 5, 22), y0 = Uniform(rng, 4, 23);
    const int x1 = Uniform(rng, 5, 22), y1 = Uniform(rng, 4, 23);
    const uint8_t ink = static_cast<uint8_t>(Uniform(rng, 96, 255));
    const int steps = std::max(std::abs(x1 - x0), std::abs(y1 - y0)) + 1;
    for (int t = 0; t < steps; ++t) {
      const double f = steps == 1 ? 0.0 : static_cast<double>(t) / (steps - 1);
      const int cx = static_cast<int>(std::lround(x0 + f * (x1 - x0)));
      const int cy = static_cast<int>(std::lround(y0 + f * (y1 - y0)));
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = cx + dx, y = cy + dy;
          if (x < 0 || y < 0 || x >= kSize || y >= kSize) continue;
          // Halo pixels get half intensity, still never black.
          const uint8_t v = (dx == 0 && dy == 0) ? ink : static_cast<uint8_t>(ink / 2);
          uint8_t& px = g.pixels[y * kSize + x];
          px = std::max(px, v);
        }
      }
    }
  }
  return g;
}

RasterImage ColorizeGlyph(const GrayImage& glyph, Rgb color) {
  RasterImage out(glyph.width, glyph.height);
  for (std::size_t i = 0; i < glyph.pixels.size(); ++i) {
    const uint8_t v = glyph.pixels[i];
    out.set(i, v == 0 ? color : Rgb{v, v, v});
  }
  return out;
}

namespace {

void CheckPalette(const std::vector<Rgb>& palette) {
  if (palette.size() != 10) {
    throw Error(ErrorCode::kInvalidArgument, "palette must have 10 colours");
  }
  std::set<Rgb> seen;
  for (Rgb c : palette) {
    if (c == Rgb{0, 0, 0}) {
      throw Error(ErrorCode::kInvalidArgument, "palette colour may not be black");
    }
    if (!seen.insert(c).second) {
      throw Error(ErrorCode::kInvalidArgument, "palette colours must be distinct");
    }
  }
}

int ParseDigit(const std::string& cls) {
  if (cls.size() != 1 || cls[0] < '0' || cls[0] > '9') {
    throw Error(ErrorCode::kInvalidLabel, "class '" + cls + "' is not in 0-9");
  }
  return cls[0] - '0';
}

Segment BackgroundSegment(const GrayImage& glyph) {
  Bitmap bits(glyph.width, glyph.height);
  for (std::size_t i = 0; i < glyph.pixels.size(); ++i) {
    bits.bits[i] = glyph.pixels[i] == 0 ? 1 : 0;
  }
  return Segment{kBackgroundLabel, RleEncode(bits), std::nullopt, "generator"};
}

}  // namespace

DatasetSummary GenColoredMnist(const ColoredMnistSpec& spec, const fs::path& out_dir) {
  CheckPalette(spec.palette);
  struct Source {
    std::string id;
    int digit;
    GrayImage glyph;
  };
  std::vector<Source> sources;
  if (spec.source_dir) {
    const LabelList labels = ReadLabelsCsv(*spec.source_dir / "labels.csv");
    for (const auto& [id, cls] : labels) {
      const int digit = ParseDigit(cls);
      sources.push_back({id, digit, LoadGrayPng(*spec.source_dir / "images" / (id + ".png"))});
    }
  } else {
    if (spec.n_per_class < 1) {
      throw Error(ErrorCode::kInvalidArgument, "n_per_class must be >= 1");
    }
    for (int d = 0; d < 10; ++d) {
      for (int i = 0; i < spec.n_per_class; ++i) {
        sources.push_back({"d" + std::to_string(d) + "_" + PaddedId("", i), d,
                           SyntheticGlyph(d, i, spec.seed)});
      }
    }
  }

  PrepareOutDir(out_dir);
  DatasetSummary summary;
  LabelList labels;
  AnnotationStore annotations;
  for (const Source& s : sources) {
    const RasterImage image = ColorizeGlyph(s.glyph, spec.palette[s.digit]);
    SavePng(out_dir / "images" / (s.id + ".png"), image);
    const std::string cls = std::to_string(s.digit);
    labels.emplace_back(s.id, cls);
    std::vector<Segment> segs;
    Segment bg = BackgroundSegment(s.glyph);
    if (!bg.mask.Empty()) segs.push_back(std::move(bg));
    annotations.Put(s.id, std::move(segs));
    ++summary.images;
    ++summary.per_class[cls];
  }
  WriteLabelsCsv(out_dir / "labels.csv", labels);
  annotations.Save(out_dir / "annotations.json");
  return summary;
}

Json WatermarkSpec::ToJson() const {
  Json j;
  j["template"] = tmpl.ToJson();
  j["fraction"] = fraction;
  j["stratified"] = stratified;
  j["margin"] = margin;
  j["n_per_class"] = n_per_class;
  j["width"] = width;
  j["height"] = height;
  j["seed"] = seed;
  j["class_a"] = class_a;
  j["class_b"] = class_b;
  j["base_a"] = RgbToJson(base_a);
  j["base_b"] = RgbToJson(base_b);
  j["noise"] = noise;
  j["stamped_texture"] = stamped_on_opposite_texture ? "opposite" : "own";
  return j;
}

WatermarkSpec WatermarkSpec::FromJson(const Json& j) {
  WatermarkSpec s;
  try {
    if (j.contains("template")) s.tmpl = WatermarkTemplate::FromJson(j["template"]);
    s.fraction = j.value("fraction", s.fraction);
    s.stratified = j.value("stratified", s.stratified);
    s.margin = j.value("margin", s.margin);
    s.n_per_class = j.value("n_per_class", s.n_per_class);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.seed = j.value("seed", s.seed);
    s.class_a = j.value("class_a", s.class_a);
    s.class_b = j.value("class_b", s.class_b);
    if (j.contains("base_a")) s.base_a = RgbFromJson(j["base_a"]);
    if (j.contains("base_b")) s.base_b = RgbFromJson(j["base_b"]);
    s.noise = j.value("noise", s.noise);
    const std::string tex = j.value("stamped_texture", std::string("opposite"));
    if (tex != "opposite" && tex != "own") {
      throw Error(ErrorCode::kConfigError, "stamped_texture must be opposite or own");
    }
    s.stamped_on_opposite_texture = tex == "opposite";
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("watermark spec: ") + e.what());
  }
  return s;
}

namespace {

RasterImage Texture(int w, int h, Rgb base, int noise, std::mt19937_64& rng) {
  RasterImage img(w, h);
  auto jitter = [&](uint8_t c) {
    return static_cast<uint8_t>(std::clamp(c + Uniform(rng, -noise, noise), 1, 254));
  };
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    img.set(i, Rgb{jitter(base.r), jitter(base.g), jitter(base.b)});
  }
  return img;
}

}  // namespace

DatasetSummary GenWatermarkDataset(const WatermarkSpec& spec, const fs::path& out_dir) {
  if (spec.n_per_class < 1) throw Error(ErrorCode::kInvalidArgument, "n_per_class must be >= 1");
  if (!(spec.fraction >= 0.0 && spec.fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fraction must be in [0, 1]");
  }
  if (spec.width < 1 || spec.height < 1 || spec.margin < 0 || spec.noise < 0) {
    throw Error(ErrorCode::kInvalidArgument, "bad image size, margin or noise");
  }
  if (spec.class_a == spec.class_b) {
    throw Error(ErrorCode::kInvalidArgument, "class names must differ");
  }
  if (TemplateTooLarge(spec.width, spec.height, spec.tmpl, spec.margin)) {
    throw Error(ErrorCode::kTemplateTooLarge,
                "template does not fit at every corner of a " +
                    std::to_string(spec.width) + "x" + std::to_string(spec.height) +
                    " image");
  }

  const int n = spec.n_per_class;
  const int stamped = static_cast<int>(std::llround(spec.fraction * n));
  std::mt19937_64 pick(DeriveSeed(spec.seed, 0x5741, 0));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), pick);
  // corner_of[i] = corner index for stamped class-A image i, -1 otherwise.
  std::vector<int> corner_of(n, -1);
  std::vector<int> chosen(order.begin(), order.begin() + stamped);
  std::sort(chosen.begin(), chosen.end());
  for (int k = 0; k < stamped; ++k) {
    corner_of[chosen[k]] = spec.stratified ? k % 4 : Uniform(pick, 0, 3);
  }

  const auto anchors = WatermarkAnchors(spec.width, spec.height, spec.tmpl, spec.margin);
  PrepareOutDir(out_dir);
  DatasetSummary summary;
  for (int c = 0; c < 4; ++c) summary.watermarks_per_corner[std::string(PositionName(anchors[c].corner))] = 0;
  LabelList labels;
  AnnotationStore annotations;
  for (int cls = 0; cls < 2; ++cls) {
    const std::string& name = cls == 0 ? spec.class_a : spec.class_b;
    const std::string prefix = cls == 0 ? "a_" : "b_";
    for (int i = 0; i < n; ++i) {
      const std::string id = PaddedId(prefix, i);
      std::mt19937_64 rng(DeriveSeed(spec.seed, static_cast<uint64_t>(cls) + 1,
                                     static_cast<uint64_t>(i)));
      const int corner = cls == 0 ? corner_of[i] : -1;
      Rgb base = cls == 0 ? spec.base_a : spec.base_b;
      if (corner >= 0 && spec.stamped_on_opposite_texture) base = spec.base_b;
      RasterImage img = Texture(spec.width, spec.height, base, spec.noise, rng);
      std::vector<Segment> segs;
      if (corner >= 0) {
        StampWatermark(&img, spec.tmpl, anchors[corner]);
        segs.push_back(Segment{"watermark",
                               WatermarkMask(spec.width, spec.height, spec.tmpl,
                                             anchors[corner]),
                               std::nullopt, "generator"});
        ++summary.watermarked;
        ++summary.watermarks_per_corner[std::string(PositionName(anchors[corner].corner))];
      }
      SavePng(out_dir / "images" / (id + ".png"), img);
      annotations.Put(id, std::move(segs));
      labels.emplace_back(id, name);
      ++summary.images;
      ++summary.per_class[name];
    }
  }
  WriteLabelsCsv(out_dir / "labels.csv", labels);
  annotations.Save(out_dir / "annotations.json");
  return summary;
}

Json PaletteClassifierJson(const std::vector<Rgb>& palette) {
  Json pal = Json::object();
  for (std::size_t i = 0; i < palette.size(); ++i) {
    pal[std::to_string(i)] = RgbToJson(palette[i]);
  }
  Json j;
  j["kind"] = "dominant_color_rule";
  j["palette"] = std::move(pal);
  j["fallback"] = "unknown";
  return j;
}

Json ColoredMnistScanConfig(const ColoredMnistSpec& spec, const std::string& dataset,
                            const std::string& run_dir) {
  Json palette = Json::array();
  for (Rgb c : spec.palette) palette.push_back(RgbToJson(c));
  Json edit;
  edit["id"] = "shift";
  edit["kind"] = "solid_fill";
  edit["palette_shift"] = {{"palette", palette}, {"step", 1}};
  Json j;
  j["run_id"] = fs::path(run_dir).filename().string();
  j["dataset"] = dataset;
  j["run_dir"] = run_dir;
  j["segmenter"] = {{"kind", "dominant_color"}};
  j["edits"] = Json::array({edit});
  j["classifier"] = PaletteClassifierJson(spec.palette);
  j["workers"] = 1;
  j["seed"] = spec.seed;
  return j;
}

Json WatermarkScanConfig(const WatermarkSpec& spec, const std::string& dataset,
                         const std::string& run_dir) {
  auto intensity = [](Rgb c) { return (c.r + c.g + c.b) / 3.0; };
  const double ia = intensity(spec.base_a), ib = intensity(spec.base_b);
  Json edit;
  edit["id"] = "fill";
  edit["kind"] = "solid_fill";
  edit["color"] = RgbToJson(spec.base_b);
  Json classifier;
  classifier["kind"] = "watermark_oracle";
  classifier["template"] = spec.tmpl.ToJson();
  classifier["margin"] = spec.margin;
  classifier["shortcut_class"] = spec.class_a;
  classifier["texture_rule"] = {{"threshold", (ia + ib) / 2.0},
                                {"above", ia >= ib ? spec.class_a : spec.class_b},
                                {"below", ia >= ib ? spec.class_b : spec.class_a}};
  Json j;
  j["run_id"] = fs::path(run_dir).filename().string();
  j["dataset"] = dataset;
  j["run_dir"] = run_dir;
  j["segmenter"] = {{"kind", "annotations"}, {"fill_unrecognised", true}};
  j["edits"] = Json::array({edit});
  j["classifier"] = std::move(classifier);
  j["workers"] = 1;
  j["seed"] = spec.seed;
  return j;
}

}  // namespace cofscan
