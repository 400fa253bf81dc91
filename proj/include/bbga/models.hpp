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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bbga/autodiff.hpp"
#include "bbga/graph.hpp"
#include "bbga/matrix.hpp"
#include "bbga/rng.hpp"

namespace bbga {

/// Two-layer GCN: softmax(A_hat relu(A_hat X W0) W1).
struct GcnModel {
  Matrix w0;  // F x H
  Matrix w1;  // H x K
};

/// Linearized two-hop surrogate: softmax(A_hat^2 X W).
struct SurrogateModel {
  Matrix w;  // F x K
};

struct TrainConfig {
  std::size_t steps = 100;
  double learning_rate = 0.1;
  std::size_t hidden = 16;
  std::uint64_t init_seed = 0;
  // <= 0 selects the Glorot bound sqrt(6 / (fan_in + fan_out)) per matrix.
  double init_scale = 0.0;

  void validate() const;
};

/// Default configuration of the victim GCN.
TrainConfig default_gcn_config();
/// Default configuration of the surrogate (also the attack inner loop).
TrainConfig default_surrogate_config();

template <typename Model>
struct Trained {
  Model model;
  std::vector<double> loss_curve;      // training loss before each update
  std::vector<double> accuracy_curve;  // training-set accuracy before each update
};

/// Seeded uniform(-bound, bound) matrix; bound from `scale` or Glorot.
Matrix init_weights(std::size_t rows, std::size_t cols, double scale, Rng& rng);

Matrix gcn_forward(const GcnModel& model, const Matrix& a_hat, const Matrix& x);
Matrix surrogate_forward(const SurrogateModel& model, const Matrix& a_hat, const Matrix& x);

/// Full-batch gradient descent on masked cross-entropy over `train_set`.
/// `n_classes` fixes the output width (labels must lie below it).
Trained<GcnModel> train_gcn(const Matrix& adjacency, const Matrix& x, const Labels& labels,
                            const NodeSet& train_set, int n_classes, const TrainConfig& cfg);
Trained<SurrogateModel> train_surrogate(const Matrix& adjacency, const Matrix& x,
                                        const Labels& labels, const NodeSet& train_set,
                                        int n_classes, const TrainConfig& cfg);

/// Row-wise argmax; ties go to the lowest class id.
Labels argmax_rows(const Matrix& probs);
Labels predict_labels(const GcnModel& model, const Matrix& adjacency, const Matrix& x);
Labels predict_labels(const SurrogateModel& model, const Matrix& adjacency, const Matrix& x);

/// Fraction of nodes in `on` where pred == truth. Throws on an empty set.
double accuracy(const Labels& pred, const Labels& truth, const NodeSet& on);

/// Number of classes implied by a label vector (max + 1).
int class_count(const Labels& labels);

/// Surrogate training recorded on a tape so that losses built from the
/// trained weights differentiate back to `a_var` through every update.
struct InnerTraining {
  ad::Var a_hat;    // normalized adjacency built from a_var
  ad::Var weights;  // theta_T
  ad::Var probs;    // surrogate output at theta_T
};

InnerTraining inner_train_differentiable(ad::Tape& tape, ad::Var a_var, const Matrix& x,
                                         const Labels& labels, const NodeSet& train_set,
                                         int n_classes, const TrainConfig& cfg);

}  // namespace bbga
