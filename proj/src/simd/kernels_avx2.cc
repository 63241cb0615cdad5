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

// Built with -mavx2 only; never called unless CpuHasAvx2() is true.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "cofscan/simd/kernels.h"

namespace cofscan::simd {
namespace {

constexpr int kLanes = 8;

inline float RowTap(const float* row, int x, int width,
                    std::span<const float> weights, int radius) {
  float acc = 0.0f;
  const int taps = static_cast<int>(weights.size());
  for (int k = 0; k < taps; ++k) {
    const int sx = std::clamp(x + k - radius, 0, width - 1);
    acc = acc + weights[k] * row[sx];
  }
  return acc;
}

void ConvolveRows(std::span<const float> src, std::span<float> dst, int width,
                  int height, std::span<const float> weights) {
  const int radius = static_cast<int>(weights.size() / 2);
  const int taps = static_cast<int>(weights.size());
  const int simd_end = width - radius - kLanes;  // last valid vector start
  for (int y = 0; y < height; ++y) {
    const float* row = src.data() + static_cast<std::size_t>(y) * width;
    float* out = dst.data() + static_cast<std::size_t>(y) * width;
    int x = 0;
    for (; x < std::min(radius, width); ++x) {
      out[x] = RowTap(row, x, width, weights, radius);
    }
    for (; x <= simd_end; x += kLanes) {
      __m256 acc = _mm256_setzero_ps();
      const float* base = row + x - radius;
      for (int k = 0; k < taps; ++k) {
        const __m256 w = _mm256_set1_ps(weights[k]);
        acc = _mm256_add_ps(acc, _mm256_mul_ps(w, _mm256_loadu_ps(base + k)));
      }
      _mm256_storeu_ps(out + x, acc);
    }
    for (; x < width; ++x) out[x] = RowTap(row, x, width, weights, radius);
  }
}

void ConvolveCols(std::span<const float> src, std::span<float> dst, int width,
                  int height, std::span<const float> weights) {
  const int radius = static_cast<int>(weights.size() / 2);
  const int taps = static_cast<int>(weights.size());
  for (int y = 0; y < height; ++y) {
    float* out = dst.data() + static_cast<std::size_t>(y) * width;
    int x = 0;
    for (; x + kLanes <= width; x += kLanes) {
      __m256 acc = _mm256_setzero_ps();
      for (int k = 0; k < taps; ++k) {
        const int sy = std::clamp(y + k - radius, 0, height - 1);
        const float* row = src.data() + static_cast<std::size_t>(sy) * width;
        const __m256 w = _mm256_set1_ps(weights[k]);
        acc = _mm256_add_ps(acc, _mm256_mul_ps(w, _mm256_loadu_ps(row + x)));
      }
      _mm256_storeu_ps(out + x, acc);
    }
    for (; x < width; ++x) {
      float acc = 0.0f;
      for (int k = 0; k < taps; ++k) {
        const int sy = std::clamp(y + k - radius, 0, height - 1);
        acc = acc + weights[k] * src[static_cast<std::size_t>(sy) * width + x];
      }
      out[x] = acc;
    }
  }
}

inline __m256i QuantizeLanes(const float* p) {
  const __m256 half = _mm256_set1_ps(0.5f);
  const __m256 lo = _mm256_setzero_ps();
  const __m256 hi = _mm256_set1_ps(255.0f);
  __m256 v = _mm256_floor_ps(_mm256_add_ps(_mm256_loadu_ps(p), half));
  v = _mm256_min_ps(_mm256_max_ps(v, lo), hi);
  return _mm256_cvttps_epi32(v);
}

void QuantizeU8(std::span<const float> src, std::span<uint8_t> dst) {
  const std::size_t n = src.size();
  const __m256i order = _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7);
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i a = QuantizeLanes(src.data() + i);
    const __m256i b = QuantizeLanes(src.data() + i + 8);
    const __m256i c = QuantizeLanes(src.data() + i + 16);
    const __m256i d = QuantizeLanes(src.data() + i + 24);
    const __m256i ab = _mm256_packus_epi32(a, b);
    const __m256i cd = _mm256_packus_epi32(c, d);
    const __m256i bytes = _mm256_packus_epi16(ab, cd);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst.data() + i),
                        _mm256_permutevar8x32_epi32(bytes, order));
  }
  for (; i < n; ++i) {
    float v = std::floor(src[i] + 0.5f);
    v = std::min(std::max(v, 0.0f), 255.0f);
    dst[i] = static_cast<uint8_t>(v);
  }
}

void SelectBytes(std::span<const uint8_t> a, std::span<const uint8_t> b,
                 std::span<const uint8_t> select, std::span<uint8_t> out) {
  const std::size_t n = out.size();
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const auto* pa = reinterpret_cast<const __m256i*>(a.data() + i);
    const auto* pb = reinterpret_cast<const __m256i*>(b.data() + i);
    const auto* ps = reinterpret_cast<const __m256i*>(select.data() + i);
    const __m256i sel = _mm256_loadu_si256(ps);
    // Normalize any nonzero selector byte to 0xFF.
    const __m256i mask = _mm256_xor_si256(
        _mm256_cmpeq_epi8(sel, _mm256_setzero_si256()),
        _mm256_set1_epi8(static_cast<char>(0xFF)));
    const __m256i v = _mm256_blendv_epi8(_mm256_loadu_si256(pb),
                                         _mm256_loadu_si256(pa), mask);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.data() + i), v);
  }
  for (; i < n; ++i) out[i] = select[i] ? a[i] : b[i];
}

void OrInto(std::span<uint8_t> acc, std::span<const uint8_t> bits) {
  const std::size_t n = acc.size();
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    auto* pa = reinterpret_cast<__m256i*>(acc.data() + i);
    const auto* pb = reinterpret_cast<const __m256i*>(bits.data() + i);
    _mm256_storeu_si256(
        pa, _mm256_or_si256(_mm256_loadu_si256(pa), _mm256_loadu_si256(pb)));
  }
  for (; i < n; ++i) acc[i] |= bits[i];
}

inline uint32_t ZeroBits(const uint8_t* p) {
  const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
  return static_cast<uint32_t>(
      _mm256_movemask_epi8(_mm256_cmpeq_epi8(v, _mm256_setzero_si256())));
}

std::size_t CountNonzero(std::span<const uint8_t> bits) {
  const std::size_t n = bits.size();
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    count += 32 - static_cast<std::size_t>(__builtin_popcount(ZeroBits(bits.data() + i)));
  }
  for (; i < n; ++i) count += bits[i] != 0;
  return count;
}

std::size_t RunEnd(std::span<const uint8_t> bits, std::size_t start,
                   bool value) {
  const std::size_t n = bits.size();
  std::size_t i = start;
  for (; i + 32 <= n; i += 32) {
    const uint32_t zeros = ZeroBits(bits.data() + i);
    const uint32_t stop = value ? zeros : ~zeros;
    if (stop != 0) return i + static_cast<std::size_t>(__builtin_ctz(stop));
  }
  while (i < n && (bits[i] != 0) == value) ++i;
  return i;
}

}  // namespace

const KernelTable* Avx2Kernels() {
  static const KernelTable table{
      "avx2",      ConvolveRows, ConvolveCols, QuantizeU8,
      SelectBytes, OrInto,       CountNonzero, RunEnd,
  };
  return &table;
}

}  // namespace cofscan::simd
