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

#pragma once

// Dense double-precision inner loops. Every kernel has a portable scalar
// reference and, on x86-64, an AVX2+FMA variant. The active table is picked
// once at first use from CPUID; BBGA_KERNELS=scalar forces the reference.
//
// All matrices are row-major and contiguous.

#include <cstddef>
#include <string_view>

namespace bbga::kernels {

struct KernelTable {
  std::string_view name;

  // c[m x n] (+)= a[m x k] * b[k x n]. Zero entries of `a` are skipped.
  void (*gemm)(const double* a, const double* b, double* c, std::size_t m,
               std::size_t k, std::size_t n, bool accumulate);
  // c[k x n] (+)= transpose(a[m x k]) * b[m x n].
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate);
  // c[m x n] (+)= a[m x k] * transpose(b[n x k]).
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_i (x_i - y_i)^2
  double (*squared_distance)(const double* x, const double* y, std::size_t n);
  // z_i = x_i * y_i
  void (*hadamard)(const double* x, const double* y, double* z, std::size_t n);
};

const KernelTable& scalar_table();

/// The AVX2 table, or nullptr when the CPU (or the build) lacks AVX2/FMA.
const KernelTable* avx2_table();

/// Table used by the rest of the library.
const KernelTable& active();

}  // namespace bbga::kernels
