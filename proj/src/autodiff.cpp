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

#include "bbga/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "bbga/error.hpp"
#include "bbga/kernels.hpp"

namespace bbga::ad {

namespace {

std::atomic<std::uint64_t> g_next_tape{1};

// Smallest probability fed to log(); keeps the loss finite on saturated rows.
constexpr double kProbFloor = 1e-300;

std::string shape(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw ShapeError(std::string(op) + ": " + detail);
}

void accumulate(std::vector<Matrix>& adj, std::size_t id, Matrix&& g) {
  if (adj[id].empty())
    adj[id] = std::move(g);
  else
    adj[id] += g;
}

}  // namespace

Tape::Tape() : tag_(g_next_tape.fetch_add(1)) {}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape != tag_ || v.id >= nodes_.size())
    throw Error("autodiff: variable does not belong to this tape");
  return nodes_[v.id];
}

Var Tape::push(Node n) {
  const Matrix& val = *n.value;
  nodes_.push_back(std::move(n));
  return Var{tag_, nodes_.size() - 1, val.rows(), val.cols()};
}

Var Tape::leaf(Matrix value) { return leaf(std::make_shared<const Matrix>(std::move(value))); }

Var Tape::leaf(std::shared_ptr<const Matrix> value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Matrix Tape::eval(const Node& n, Matrix* aux_out) const {
  const Matrix* a = n.n_parents > 0 ? nodes_[n.parents[0]].value.get() : nullptr;
  const Matrix* b = n.n_parents > 1 ? nodes_[n.parents[1]].value.get() : nullptr;
  switch (n.op) {
    case Op::kLeaf:
      return *n.value;
    case Op::kMatMul:
      return bbga::matmul(*a, *b);
    case Op::kAdd:
      return *a + *b;
    case Op::kSub:
      return *a - *b;
    case Op::kScalarMul:
      return n.scalar * *a;
    case Op::kHadamard:
      return bbga::hadamard(*a, *b);
    case Op::kAddIdentity: {
      Matrix out = *a;
      for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) += 1.0;
      return out;
    }
    case Op::kRowSum: {
      Matrix out(a->rows(), 1);
      for (std::size_t i = 0; i < a->rows(); ++i) {
        double s = 0.0;
        for (double v : a->row(i)) s += v;
        out(i, 0) = s;
      }
      return out;
    }
    case Op::kSum:
      return Matrix(1, 1, bbga::sum(*a));
    case Op::kTranspose:
      return bbga::transpose(*a);
    case Op::kRsqrtDiagScale: {
      const std::size_t n_rows = a->rows();
      Matrix s(n_rows, 1);
      for (std::size_t i = 0; i < n_rows; ++i) {
        double d = 0.0;
        for (double v : a->row(i)) d += v;
        if (!(d > 0.0))
          throw NumericError("rsqrt_diag_scale: non-positive row sum at row " +
                             std::to_string(i));
        s(i, 0) = 1.0 / std::sqrt(d);
      }
      Matrix out(n_rows, n_rows);
      for (std::size_t i = 0; i < n_rows; ++i)
        for (std::size_t j = 0; j < n_rows; ++j) out(i, j) = (*a)(i, j) * s(i, 0) * s(j, 0);
      if (aux_out != nullptr) *aux_out = std::move(s);
      return out;
    }
    case Op::kSoftmaxRows: {
      Matrix out(a->rows(), a->cols());
      for (std::size_t i = 0; i < a->rows(); ++i) {
        auto in = a->row(i);
        auto o = out.row(i);
        const double mx = *std::max_element(in.begin(), in.end());
        double z = 0.0;
        for (std::size_t j = 0; j < in.size(); ++j) {
          o[j] = std::exp(in[j] - mx);
          z += o[j];
        }
        for (double& v : o) v /= z;
      }
      return out;
    }
    case Op::kCrossEntropyMasked: {
      double loss = 0.0;
      for (std::size_t i : n.rows) loss -= std::log(std::max((*a)(i, n.targets[i]), kProbFloor));
      return Matrix(1, 1, loss / static_cast<double>(n.rows.size()));
    }
    case Op::kRelu: {
      Matrix out = *a;
      for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
      return out;
    }
  }
  throw Error("autodiff: unknown op");
}

Tape::Node Tape::make_node(Op op, std::initializer_list<std::size_t> parents) {
  Tape::Node n;
  n.op = op;
  for (std::size_t p : parents) n.parents[n.n_parents++] = p;
  return n;
}

#define BBGA_RECORD(NODE)                                \
  do {                                                   \
    Node rec_ = (NODE);                                  \
    Matrix aux_;                                         \
    rec_.value = std::make_shared<const Matrix>(eval(rec_, &aux_)); \
    rec_.aux = std::move(aux_);                          \
    return push(std::move(rec_));                        \
  } while (0)

Var Tape::matmul(Var a, Var b) {
  (void)node(a), (void)node(b);
  require(a.cols == b.rows, "matmul", shape(a.rows, a.cols) + " * " + shape(b.rows, b.cols));
  BBGA_RECORD(make_node(Op::kMatMul, {a.id, b.id}));
}

Var Tape::add(Var a, Var b) {
  (void)node(a), (void)node(b);
  require(a.rows == b.rows && a.cols == b.cols, "add", "shape mismatch");
  BBGA_RECORD(make_node(Op::kAdd, {a.id, b.id}));
}

Var Tape::sub(Var a, Var b) {
  (void)node(a), (void)node(b);
  require(a.rows == b.rows && a.cols == b.cols, "sub", "shape mismatch");
  BBGA_RECORD(make_node(Op::kSub, {a.id, b.id}));
}

Var Tape::scalar_mul(Var a, double s) {
  (void)node(a);
  Node n = make_node(Op::kScalarMul, {a.id});
  n.scalar = s;
  BBGA_RECORD(std::move(n));
}

Var Tape::hadamard(Var a, Var b) {
  (void)node(a), (void)node(b);
  require(a.rows == b.rows && a.cols == b.cols, "hadamard", "shape mismatch");
  BBGA_RECORD(make_node(Op::kHadamard, {a.id, b.id}));
}

Var Tape::add_identity(Var a) {
  (void)node(a);
  require(a.rows == a.cols, "add_identity", "matrix must be square");
  BBGA_RECORD(make_node(Op::kAddIdentity, {a.id}));
}

Var Tape::row_sum(Var a) {
  (void)node(a);
  BBGA_RECORD(make_node(Op::kRowSum, {a.id}));
}

Var Tape::sum(Var a) {
  (void)node(a);
  BBGA_RECORD(make_node(Op::kSum, {a.id}));
}

Var Tape::transpose(Var a) {
  (void)node(a);
  BBGA_RECORD(make_node(Op::kTranspose, {a.id}));
}

Var Tape::rsqrt_diag_scale(Var a) {
  (void)node(a);
  require(a.rows == a.cols, "rsqrt_diag_scale", "matrix must be square");
  BBGA_RECORD(make_node(Op::kRsqrtDiagScale, {a.id}));
}

Var Tape::softmax_rows(Var a) {
  (void)node(a);
  require(a.cols > 0, "softmax_rows", "need at least one column");
  BBGA_RECORD(make_node(Op::kSoftmaxRows, {a.id}));
}

Var Tape::cross_entropy_masked(Var probs, std::span<const int> targets, const NodeSet& rows) {
  (void)node(probs);
  require(targets.size() == probs.rows, "cross_entropy_masked",
          "targets must have one entry per row");
  if (rows.empty()) throw NumericError("cross_entropy_masked: empty row set");
  for (std::size_t i : rows) {
    require(i < probs.rows, "cross_entropy_masked", "row out of range");
    require(targets[i] >= 0 && static_cast<std::size_t>(targets[i]) < probs.cols,
            "cross_entropy_masked", "target class out of range");
  }
  Node n = make_node(Op::kCrossEntropyMasked, {probs.id});
  n.targets.assign(targets.begin(), targets.end());
  n.rows = rows;
  BBGA_RECORD(std::move(n));
}

Var Tape::relu(Var a) {
  (void)node(a);
  BBGA_RECORD(make_node(Op::kRelu, {a.id}));
}

#undef BBGA_RECORD

const Matrix& Tape::value(Var v) const { return *node(v).value; }

Op Tape::op(Var v) const { return node(v).op; }

Matrix Tape::recompute(Var v) const { return eval(node(v), nullptr); }

std::vector<Matrix> Tape::backward(Var loss, std::span<const Var> wrt) const {
  node(loss);
  if (loss.rows != 1 || loss.cols != 1)
    throw ShapeError("backward: loss must be 1x1, got " + shape(loss.rows, loss.cols));
  for (const Var& v : wrt) node(v);

  // Only propagate into nodes that lie on a path to some requested variable.
  std::vector<char> needs(loss.id + 1, 0);
  for (const Var& v : wrt)
    if (v.id <= loss.id) needs[v.id] = 1;
  for (std::size_t i = 0; i <= loss.id; ++i) {
    const Node& n = nodes_[i];
    for (int p = 0; p < n.n_parents; ++p) needs[i] = needs[i] || needs[n.parents[p]];
  }

  const kernels::KernelTable& k = kernels::active();
  std::vector<Matrix> adj(loss.id + 1);
  adj[loss.id] = Matrix(1, 1, 1.0);
  std::vector<Matrix> result(wrt.size());
  std::vector<char> wanted(loss.id + 1, 0);
  for (const Var& v : wrt)
    if (v.id <= loss.id) wanted[v.id] = 1;
  std::vector<Matrix> kept(loss.id + 1);

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    if (adj[i].empty() || !needs[i]) continue;
    const Node& n = nodes_[i];
    const Matrix& g = adj[i];
    const std::size_t pa = n.parents[0];
    const std::size_t pb = n.parents[1];
    auto want = [&](int p) { return p < n.n_parents && needs[n.parents[p]]; };

    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatMul: {
        const Matrix& a = *nodes_[pa].value;
        const Matrix& b = *nodes_[pb].value;
        if (want(0)) {
          if (adj[pa].empty()) adj[pa] = Matrix(a.rows(), a.cols());
          k.gemm_nt(g.data(), b.data(), adj[pa].data(), g.rows(), g.cols(), b.rows(), true);
        }
        if (want(1)) {
          if (adj[pb].empty()) adj[pb] = Matrix(b.rows(), b.cols());
          k.gemm_tn(a.data(), g.data(), adj[pb].data(), a.rows(), a.cols(), g.cols(), true);
        }
        break;
      }
      case Op::kAdd:
        if (want(0)) accumulate(adj, pa, Matrix(g));
        if (want(1)) accumulate(adj, pb, Matrix(g));
        break;
      case Op::kSub:
        if (want(0)) accumulate(adj, pa, Matrix(g));
        if (want(1)) accumulate(adj, pb, -1.0 * g);
        break;
      case Op::kScalarMul:
        if (want(0)) accumulate(adj, pa, n.scalar * g);
        break;
      case Op::kHadamard:
        if (want(0)) accumulate(adj, pa, bbga::hadamard(g, *nodes_[pb].value));
        if (want(1)) accumulate(adj, pb, bbga::hadamard(g, *nodes_[pa].value));
        break;
      case Op::kAddIdentity:
        if (want(0)) accumulate(adj, pa, Matrix(g));
        break;
      case Op::kRowSum:
        if (want(0)) {
          const Matrix& a = *nodes_[pa].value;
          Matrix d(a.rows(), a.cols());
          for (std::size_t r = 0; r < a.rows(); ++r)
            for (double& v : d.row(r)) v = g(r, 0);
          accumulate(adj, pa, std::move(d));
        }
        break;
      case Op::kSum:
        if (want(0)) {
          const Matrix& a = *nodes_[pa].value;
          accumulate(adj, pa, Matrix(a.rows(), a.cols(), g(0, 0)));
        }
        break;
      case Op::kTranspose:
        if (want(0)) accumulate(adj, pa, bbga::transpose(g));
        break;
      case Op::kRsqrtDiagScale:
        if (want(0)) {
          // out_ij = a_ij s_i s_j with s_i = d_i^-1/2 and d_i = sum_j a_ij.
          // d out / d a_ij = g_ij s_i s_j + c_i where
          // c_i = -1/2 s_i^3 * sum_j (g_ij a_ij + g_ji a_ji) s_j.
          const Matrix& a = *nodes_[pa].value;
          const Matrix& s = n.aux;
          const std::size_t m = a.rows();
          std::vector<double> c(m, 0.0);
          for (std::size_t r = 0; r < m; ++r) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j)
              acc += (g(r, j) * a(r, j) + g(j, r) * a(j, r)) * s(j, 0);
            c[r] = -0.5 * s(r, 0) * s(r, 0) * s(r, 0) * acc;
          }
          Matrix d(m, m);
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t j = 0; j < m; ++j) d(r, j) = g(r, j) * s(r, 0) * s(j, 0) + c[r];
          accumulate(adj, pa, std::move(d));
        }
        break;
      case Op::kSoftmaxRows:
        if (want(0)) {
          const Matrix& p = *n.value;
          Matrix d(p.rows(), p.cols());
          for (std::size_t r = 0; r < p.rows(); ++r) {
            auto pr = p.row(r);
            auto gr = g.row(r);
            const double inner = k.dot(pr.data(), gr.data(), pr.size());
            auto dr = d.row(r);
            for (std::size_t j = 0; j < pr.size(); ++j) dr[j] = pr[j] * (gr[j] - inner);
          }
          accumulate(adj, pa, std::move(d));
        }
        break;
      case Op::kCrossEntropyMasked:
        if (want(0)) {
          const Matrix& p = *nodes_[pa].value;
          Matrix d(p.rows(), p.cols());
          const double scale = g(0, 0) / static_cast<double>(n.rows.size());
          for (std::size_t r : n.rows) {
            const double prob = p(r, n.targets[r]);
            if (prob > kProbFloor) d(r, n.targets[r]) -= scale / prob;
          }
          accumulate(adj, pa, std::move(d));
        }
        break;
      case Op::kRelu:
        if (want(0)) {
          const Matrix& a = *nodes_[pa].value;
          Matrix d = g;
          for (std::size_t t = 0; t < d.size(); ++t)
            if (!(a.data()[t] > 0.0)) d.data()[t] = 0.0;
          accumulate(adj, pa, std::move(d));
        }
        break;
    }
    if (wanted[i])
      kept[i] = std::move(adj[i]);
    else
      adj[i] = Matrix();
  }

  for (std::size_t w = 0; w < wrt.size(); ++w) {
    const Var& v = wrt[w];
    if (v.id <= loss.id && !kept[v.id].empty())
      result[w] = kept[v.id];
    else
      result[w] = Matrix(v.rows, v.cols);
  }
  return result;
}

Matrix grad_symmetrize(const Matrix& g) {
  if (g.rows() != g.cols()) throw ShapeError("grad_symmetrize: matrix must be square");
  Matrix out(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) out(i, j) = i == j ? 0.0 : g(i, j) + g(j, i);
  return out;
}

}  // namespace bbga::ad
