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

#include <cstdlib>
#include <string_view>

#include "cofscan/simd/kernels.h"

namespace cofscan::simd {

#ifndef COFSCAN_HAVE_AVX2
const KernelTable* Avx2Kernels() { return nullptr; }
#endif

bool CpuHasAvx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& ActiveKernels() {
  static const KernelTable* selected = [] {
    const char* env = std::getenv("COFSCAN_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") {
      return &ScalarKernels();
    }
    const KernelTable* avx2 = Avx2Kernels();
    if (avx2 != nullptr && CpuHasAvx2()) return avx2;
    return &ScalarKernels();
  }();
  return *selected;
}

}  // namespace cofscan::simd
