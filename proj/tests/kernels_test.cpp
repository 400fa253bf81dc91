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

#include <doctest.h>

#include <vector>

#include "bbga/kernels.hpp"
#include "test_support.hpp"

using namespace bbga;
namespace k = bbga::kernels;

namespace {

std::vector<double> rand_vec(std::size_t n, std::uint64_t seed) {
  Matrix m = testing::random_matrix(1, n, seed);
  return {m.values().begin(), m.values().end()};
}

// Sparse-ish inputs exercise the zero-skip path of gemm.
std::vector<double> sparse_vec(std::size_t n, std::uint64_t seed) {
  std::vector<double> v = rand_vec(n, seed);
  for (std::size_t i = 0; i < n; i += 3) v[i] = 0.0;
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("scalar gemm matches a naive triple loop") {
  const std::size_t m = 5, kk = 7, n = 3;
  auto a = sparse_vec(m * kk, 1), b = rand_vec(kk * n, 2);
  std::vector<double> c(m * n, 0.0), ref(m * n, 0.0);
  k::scalar_table().gemm(a.data(), b.data(), c.data(), m, kk, n, false);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < kk; ++p) ref[i * n + j] += a[i * kk + p] * b[p * n + j];
  CHECK(max_diff(c, ref) < 1e-14);
}

TEST_CASE("active table honours BBGA_KERNELS-free default") {
  const auto& t = k::active();
  CHECK((t.name == "scalar" || t.name == "avx2"));
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const k::KernelTable* simd = k::avx2_table();
  if (simd == nullptr) {
    MESSAGE("AVX2 unavailable; equivalence test skipped");
    return;
  }
  const k::KernelTable& ref = k::scalar_table();
  // Shapes straddle the vector width, the narrow-output path and the
  // rank-1 gemm_nt path.
  const std::size_t dims[][3] = {{1, 1, 1},  {3, 5, 2},  {7, 9, 4},   {16, 33, 8},
                                 {9, 64, 9}, {40, 40, 2}, {13, 31, 17}, {5, 40, 33}};
  std::uint64_t seed = 10;
  for (const auto& d : dims) {
    const std::size_t m = d[0], kk = d[1], n = d[2];
    CAPTURE(m);
    CAPTURE(kk);
    CAPTURE(n);
    for (bool acc : {false, true}) {
      auto a = sparse_vec(m * kk, ++seed), b = rand_vec(kk * n, ++seed);
      auto c0 = rand_vec(m * n, ++seed), c1 = c0;
      ref.gemm(a.data(), b.data(), c0.data(), m, kk, n, acc);
      simd->gemm(a.data(), b.data(), c1.data(), m, kk, n, acc);
      CHECK(max_diff(c0, c1) < 1e-12);

      auto at = sparse_vec(m * kk, ++seed), bt = rand_vec(m * n, ++seed);
      auto t0 = rand_vec(kk * n, ++seed), t1 = t0;
      ref.gemm_tn(at.data(), bt.data(), t0.data(), m, kk, n, acc);
      simd->gemm_tn(at.data(), bt.data(), t1.data(), m, kk, n, acc);
      CHECK(max_diff(t0, t1) < 1e-12);

      auto an = rand_vec(m * kk, ++seed), bn = rand_vec(n * kk, ++seed);
      auto n0 = rand_vec(m * n, ++seed), n1 = n0;
      ref.gemm_nt(an.data(), bn.data(), n0.data(), m, kk, n, acc);
      simd->gemm_nt(an.data(), bn.data(), n1.data(), m, kk, n, acc);
      CHECK(max_diff(n0, n1) < 1e-12);
    }
  }
  for (std::size_t n : {0, 1, 3, 4, 5, 8, 15, 17, 64, 1001}) {
    auto x = rand_vec(n, 100 + n), y = rand_vec(n, 200 + n);
    const double dot = ref.dot(x.data(), y.data(), n);
    CHECK(std::abs(dot - simd->dot(x.data(), y.data(), n)) < 1e-13 * std::max(1.0, double(n)));
    const double sq = ref.squared_distance(x.data(), y.data(), n);
    CHECK(std::abs(sq - simd->squared_distance(x.data(), y.data(), n)) < 1e-14 * std::max(1.0, sq));
    auto y0 = y, y1 = y;
    ref.axpy(0.37, x.data(), y0.data(), n);
    simd->axpy(0.37, x.data(), y1.data(), n);
    CHECK(max_diff(y0, y1) < 1e-15);
    std::vector<double> z0(n), z1(n);
    ref.hadamard(x.data(), y.data(), z0.data(), n);
    simd->hadamard(x.data(), y.data(), z1.data(), n);
    CHECK(max_diff(z0, z1) == 0.0);
  }
}
