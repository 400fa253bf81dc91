// Copyright 2026 The bbga-lab Authors.
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

#include "bbga/kernels.hpp"

namespace bbga::kernels {

#if defined(BBGA_HAVE_AVX2_KERNELS)
const KernelTable& avx2_kernels();
#endif

const KernelTable* avx2_table() {
#if defined(BBGA_HAVE_AVX2_KERNELS)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable* table = [] {
    const char* forced = std::getenv("BBGA_KERNELS");
    if (forced != nullptr && std::string_view(forced) == "scalar")
      return &scalar_table();
    const KernelTable* simd = avx2_table();
    return simd != nullptr ? simd : &scalar_table();
  }();
  return *table;
}

}  // namespace bbga::kernels
