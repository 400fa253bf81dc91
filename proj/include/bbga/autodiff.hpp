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

// Reverse-mode differentiation over dense matrices. A Tape records
// operations eagerly (primals are computed at record time) and backward()
// walks it once in reverse. This is enough to differentiate a loss through
// an unrolled training run back to a relaxed adjacency matrix.
//
// A Tape is single-writer; distinct tapes are independent and may live on
// different threads.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

#include "bbga/graph.hpp"
#include "bbga/matrix.hpp"

namespace bbga::ad {

enum class Op {
  kLeaf,
  kMatMul,
  kAdd,
  kSub,
  kScalarMul,
  kHadamard,
  kAddIdentity,
  kRowSum,
  kSum,
  kTranspose,
  kRsqrtDiagScale,
  kSoftmaxRows,
  kCrossEntropyMasked,
  kRelu,
};

/// Handle to a recorded node.
struct Var {
  std::uint64_t tape = 0;
  std::size_t id = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var leaf(Matrix value);
  /// Leaf sharing storage with the caller; the matrix must not change.
  Var leaf(std::shared_ptr<const Matrix> value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scalar_mul(Var a, double s);
  Var hadamard(Var a, Var b);
  /// a + I (square a).
  Var add_identity(Var a);
  /// N x 1 column of row sums.
  Var row_sum(Var a);
  /// 1 x 1 sum of all entries.
  Var sum(Var a);
  Var transpose(Var a);
  /// D^-1/2 a D^-1/2 where D = diag(row sums of a); one composite node with
  /// a hand-derived adjoint. Throws NumericError on a non-positive row sum.
  Var rsqrt_diag_scale(Var a);
  Var softmax_rows(Var a);
  /// -(1/|rows|) * sum_{i in rows} log probs(i, targets[i]) as a 1 x 1 node.
  Var cross_entropy_masked(Var probs, std::span<const int> targets, const NodeSet& rows);
  /// max(a, 0); the subgradient at 0 is 0.
  Var relu(Var a);

  const Matrix& value(Var v) const;
  Op op(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// Recomputes a node's primal from its parents' stored primals.
  Matrix recompute(Var v) const;

  /// d loss / d v for each v in wrt; nodes the loss does not depend on get a
  /// zero matrix. Fan-out contributions are summed.
  std::vector<Matrix> backward(Var loss, std::span<const Var> wrt) const;

 private:
  struct Node {
    Op op = Op::kLeaf;
    std::size_t parents[2] = {0, 0};
    int n_parents = 0;
    double scalar = 0.0;
    std::shared_ptr<const Matrix> value;
    Matrix aux;  // rsqrt_diag_scale: D^-1/2 diagonal as N x 1
    std::vector<int> targets;
    NodeSet rows;
  };

  static Node make_node(Op op, std::initializer_list<std::size_t> parents);
  const Node& node(Var v) const;
  Var push(Node n);
  Matrix eval(const Node& n, Matrix* aux_out) const;

  std::uint64_t tag_;
  std::vector<Node> nodes_;
};

/// g + g^T with the diagonal zeroed: derivative with respect to the single
/// undirected edge variable behind entries (u,v) and (v,u).
Matrix grad_symmetrize(const Matrix& g);

}  // namespace bbga::ad
