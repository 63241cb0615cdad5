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

#ifndef COFSCAN_SIMD_KERNELS_H_
#define COFSCAN_SIMD_KERNELS_H_

// Data-parallel pixel kernels behind the editors and mask codec.
//
// Every kernel has a scalar reference implementation. Wider variants must be
// bit-identical to the reference for every input: float kernels evaluate the
// same operations in the same order per output element, only across more
// lanes at once. The equivalence is enforced by tests/unit/test_simd.cc.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace cofscan::simd {

struct KernelTable {
  std::string_view name;

  // dst[y][x] = sum_k weights[k] * src[y][clamp(x + k - r)], r = (|w|-1)/2.
  // Planes are row-major with `width` floats per row.
  void (*convolve_rows)(std::span<const float> src, std::span<float> dst,
                        int width, int height, std::span<const float> weights);

  // dst[y][x] = sum_k weights[k] * src[clamp(y + k - r)][x].
  void (*convolve_cols)(std::span<const float> src, std::span<float> dst,
                        int width, int height, std::span<const float> weights);

  // dst[i] = clamp(floor(src[i] + 0.5), 0, 255).
  void (*quantize_u8)(std::span<const float> src, std::span<uint8_t> dst);

  // out[i] = select[i] ? a[i] : b[i]. `select` holds 0x00 or 0xFF bytes.
  void (*select_bytes)(std::span<const uint8_t> a, std::span<const uint8_t> b,
                       std::span<const uint8_t> select, std::span<uint8_t> out);

  // acc[i] |= bits[i]; bitmaps hold 0 or 1.
  void (*or_into)(std::span<uint8_t> acc, std::span<const uint8_t> bits);

  // Number of nonzero bytes.
  std::size_t (*count_nonzero)(std::span<const uint8_t> bits);

  // Smallest i >= start with (bits[i] != 0) != value, or bits.size().
  std::size_t (*run_end)(std::span<const uint8_t> bits, std::size_t start,
                         bool value);
};

const KernelTable& ScalarKernels();

// nullptr when the variant was not compiled in.
const KernelTable* Avx2Kernels();

// True when the running CPU can execute the AVX2 table.
bool CpuHasAvx2();

// The table selected for this process: AVX2 when compiled in and supported,
// otherwise scalar. COFSCAN_SIMD=scalar forces the reference kernels.
const KernelTable& ActiveKernels();

}  // namespace cofscan::simd

#endif  // COFSCAN_SIMD_KERNELS_H_
