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

#include <cmath>
#include <functional>

#include "bbga/autodiff.hpp"
#include "bbga/error.hpp"
#include "test_support.hpp"

using namespace bbga;
using ad::Tape;
using ad::Var;

namespace {

using UnaryBuilder = std::function<Var(Tape&, Var)>;

// Projects the op output on a fixed random matrix so every output entry
// contributes to the scalar loss.
double projected(const UnaryBuilder& op, const Matrix& x, const Matrix& proj) {
  Tape t;
  const Var y = op(t, t.leaf(x));
  return sum(hadamard(t.value(y), proj));
}

Matrix analytic(const UnaryBuilder& op, const Matrix& x, const Matrix& proj) {
  Tape t;
  const Var xv = t.leaf(x);
  const Var y = op(t, xv);
  const Var loss = t.sum(t.hadamard(y, t.leaf(proj)));
  const Var wrt[] = {xv};
  return t.backward(loss, wrt)[0];
}

void check_unary(const char* name, const UnaryBuilder& op, const Matrix& x,
                 std::size_t out_rows, std::size_t out_cols) {
  CAPTURE(name);
  const Matrix proj = testing::random_matrix(out_rows, out_cols, 99);
  const Matrix a = analytic(op, x, proj);
  const Matrix n = testing::numeric_gradient([&](const Matrix& m) { return projected(op, m, proj); }, x);
  CHECK(testing::relative_error(a, n) <= 1e-4);
}

Matrix away_from_zero(Matrix m) {
  for (double& v : m.values())
    if (std::abs(v) < 0.05) v = 0.5;
  return m;
}

}  // namespace

TEST_CASE("every op matches central finite differences") {
  const Matrix x = testing::random_matrix(5, 5, 1);
  const Matrix other = testing::random_matrix(5, 5, 2);
  const Matrix tall = testing::random_matrix(5, 3, 3);
  const Matrix positive = testing::random_matrix(5, 5, 4, 0.1, 1.0);

  check_unary("matmul left", [&](Tape& t, Var v) { return t.matmul(v, t.leaf(tall)); }, x, 5, 3);
  check_unary("matmul right", [&](Tape& t, Var v) { return t.matmul(t.leaf(other), v); }, x, 5, 5);
  check_unary("matmul both", [](Tape& t, Var v) { return t.matmul(v, v); }, x, 5, 5);
  check_unary("add", [&](Tape& t, Var v) { return t.add(v, t.leaf(other)); }, x, 5, 5);
  check_unary("sub left", [&](Tape& t, Var v) { return t.sub(v, t.leaf(other)); }, x, 5, 5);
  check_unary("sub right", [&](Tape& t, Var v) { return t.sub(t.leaf(other), v); }, x, 5, 5);
  check_unary("scalar_mul", [](Tape& t, Var v) { return t.scalar_mul(v, -2.5); }, x, 5, 5);
  check_unary("hadamard", [&](Tape& t, Var v) { return t.hadamard(v, t.leaf(other)); }, x, 5, 5);
  check_unary("add_identity", [](Tape& t, Var v) { return t.add_identity(v); }, x, 5, 5);
  check_unary("row_sum", [](Tape& t, Var v) { return t.row_sum(v); }, x, 5, 1);
  check_unary("sum", [](Tape& t, Var v) { return t.sum(v); }, x, 1, 1);
  check_unary("transpose", [](Tape& t, Var v) { return t.transpose(v); }, tall, 3, 5);
  check_unary("rsqrt_diag_scale", [](Tape& t, Var v) { return t.rsqrt_diag_scale(v); }, positive, 5, 5);
  check_unary("softmax_rows", [](Tape& t, Var v) { return t.softmax_rows(v); }, x, 5, 5);
  check_unary("relu", [](Tape& t, Var v) { return t.relu(v); }, away_from_zero(x), 5, 5);
  const int targets[] = {0, 4, 2, 2, 1};
  check_unary("cross_entropy_masked",
              [&](Tape& t, Var v) { return t.cross_entropy_masked(v, targets, NodeSet{0, 2, 3}); },
              positive, 1, 1);
  check_unary("softmax + cross entropy",
              [&](Tape& t, Var v) {
                return t.cross_entropy_masked(t.softmax_rows(v), targets, NodeSet{1, 2, 4});
              },
              x, 1, 1);
}

TEST_CASE("classical identities") {
  const Matrix m = testing::random_matrix(4, 3, 7);
  Tape t;
  const Var mv = t.leaf(m);
  const Var wrt[] = {mv};
  CHECK(t.backward(t.sum(mv), wrt)[0] == Matrix(4, 3, 1.0));
  // tr(M^T M) / 2 = sum(M .* M) / 2; fan-out through both hadamard inputs.
  const Var half = t.scalar_mul(t.sum(t.hadamard(mv, mv)), 0.5);
  CHECK(max_abs_diff(t.backward(half, wrt)[0], m) < 1e-15);
}

TEST_CASE("shapes, primals and errors") {
  Tape t;
  const Var a = t.leaf(Matrix(2, 3, 1.0));
  const Var b = t.leaf(Matrix(3, 4, 1.0));
  const Var c = t.matmul(a, b);
  CHECK(c.rows == 2);
  CHECK(c.cols == 4);
  CHECK_THROWS_AS(t.matmul(a, a), ShapeError);
  CHECK_THROWS_AS(t.rsqrt_diag_scale(t.leaf(Matrix(2, 2, -1.0))), NumericError);

  const Var s = t.softmax_rows(t.leaf(Matrix(1, 4, 3.0)));
  for (double v : t.value(s).values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));

  Matrix onehot(2, 3);
  onehot(0, 1) = 1.0;
  onehot(1, 2) = 1.0;
  const int tg[] = {1, 2};
  CHECK(t.value(t.cross_entropy_masked(t.leaf(onehot), tg, NodeSet{0, 1}))(0, 0) == 0.0);

  const Var wrt[] = {a};
  CHECK_THROWS_AS(t.backward(c, wrt), ShapeError);
  Tape other;
  const Var foreign = other.leaf(Matrix(1, 1));
  const Var wrt_foreign[] = {foreign};
  CHECK_THROWS(t.backward(t.sum(c), wrt_foreign));

  // Unused variables get zero gradients.
  const Var unused = t.leaf(Matrix(2, 2, 5.0));
  const Var wrt_unused[] = {unused};
  CHECK(t.backward(t.sum(c), wrt_unused)[0] == Matrix(2, 2));
}

TEST_CASE("backward leaves primals untouched") {
  Tape t;
  const Var x = t.leaf(testing::random_matrix(4, 4, 11, 0.1, 1.0));
  std::vector<Var> vars{t.rsqrt_diag_scale(x)};
  vars.push_back(t.softmax_rows(t.matmul(vars.back(), x)));
  vars.push_back(t.relu(t.sub(vars.back(), t.transpose(vars.back()))));
  const Var loss = t.sum(vars.back());
  std::vector<Matrix> before;
  for (Var v : vars) before.push_back(t.value(v));
  const Var wrt[] = {x};
  (void)t.backward(loss, wrt);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    CHECK(t.value(vars[i]) == before[i]);
    CHECK(t.recompute(vars[i]) == before[i]);
  }
}

TEST_CASE("grad_symmetrize") {
  Matrix g = testing::random_matrix(4, 4, 5);
  g = g + transpose(g);
  for (std::size_t i = 0; i < 4; ++i) g(i, i) = 0.0;
  CHECK(ad::grad_symmetrize(g) == 2.0 * g);
  Matrix e(3, 3);
  e(0, 1) = 1.0;
  Matrix expect(3, 3);
  expect(0, 1) = expect(1, 0) = 1.0;
  CHECK(ad::grad_symmetrize(e) == expect);

  // Derivative along the symmetric direction E_uv + E_vu.
  const Matrix a = testing::random_graph(5, 0.5, 2);
  const Matrix proj = testing::random_matrix(5, 5, 3);
  auto f = [&](const Matrix& m) {
    return sum(hadamard(testing::plain_normalize(m), proj));
  };
  Tape t;
  const Var av = t.leaf(a);
  const Var loss = t.sum(t.hadamard(t.rsqrt_diag_scale(t.add_identity(av)), t.leaf(proj)));
  const Var wrt[] = {av};
  const Matrix sym = ad::grad_symmetrize(t.backward(loss, wrt)[0]);
  const double h = 1e-5;
  for (std::size_t u = 0; u < 5; ++u)
    for (std::size_t v = u + 1; v < 5; ++v) {
      Matrix up = a, down = a;
      up(u, v) += h, up(v, u) += h;
      down(u, v) -= h, down(v, u) -= h;
      CHECK(sym(u, v) == doctest::Approx((f(up) - f(down)) / (2 * h)).epsilon(1e-6));
    }
}
