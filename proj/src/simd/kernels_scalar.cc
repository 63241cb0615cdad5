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

#include <algorithm>
#include <cmath>

#include "cofscan/simd/kernels.h"

namespace cofscan::simd {
namespace {

void ConvolveRows(std::span<const float> src, std::span<float> dst, int width,
                  int height, std::span<const float> weights) {
  const int radius = static_cast<int>(weights.size() / 2);
  const int taps = static_cast<int>(weights.size());
  for (int y = 0; y < height; ++y) {
    const float* row = src.data() + static_cast<std::size_t>(y) * width;
    float* out = dst.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      float acc = 0.0f;
      for (int k = 0; k < taps; ++k) {
        const int sx = std::clamp(x + k - radius, 0, width - 1);
        acc = acc + weights[k] * row[sx];
      }
      out[x] = acc;
    }
  }
}

void ConvolveCols(std::span<const float> src, std::span<float> dst, int width,
                  int height, std::span<const float> weights) {
  const int radius = static_cast<int>(weights.size() / 2);
  const int taps = static_cast<int>(weights.size());
  for (int y = 0; y < height; ++y) {
    float* out = dst.data() + static_cast<std::size_t>(y) * width;
    std::fill(out, out + width, 0.0f);
    for (int k = 0; k < taps; ++k) {
      const int sy = std::clamp(y + k - radius, 0, height - 1);
      const float* row = src.data() + static_cast<std::size_t>(sy) * width;
      const float w = weights[k];
      for (int x = 0; x < width; ++x) out[x] = out[x] + w * row[x];
    }
  }
}

void QuantizeU8(std::span<const float> src, std::span<uint8_t> dst) {
  for (std::size_t i = 0; i < src.size(); ++i) {
    float v = std::floor(src[i] + 0.5f);
    v = std::min(std::max(v, 0.0f), 255.0f);
    dst[i] = static_cast<uint8_t>(v);
  }
}

void SelectBytes(std::span<const uint8_t> a, std::span<const uint8_t> b,
                 std::span<const uint8_t> select, std::span<uint8_t> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = select[i] ? a[i] : b[i];
  }
}

void OrInto(std::span<uint8_t> acc, std::span<const uint8_t> bits) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] |= bits[i];
}

std::size_t CountNonzero(std::span<const uint8_t> bits) {
  std::size_t n = 0;
  for (uint8_t b : bits) n += b != 0;
  return n;
}

std::size_t RunEnd(std::span<const uint8_t> bits, std::size_t start,
                   bool value) {
  std::size_t i = start;
  while (i < bits.size() && (bits[i] != 0) == value) ++i;
  return i;
}

}  // namespace

const KernelTable& ScalarKernels() {
  static const KernelTable table{
      "scalar",    ConvolveRows, ConvolveCols, QuantizeU8,
      SelectBytes, OrInto,       CountNonzero, RunEnd,
  };
  return table;
}

}  // namespace cofscan::simd
