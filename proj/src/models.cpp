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

#include "bbga/models.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "bbga/error.hpp"

namespace bbga {

namespace {

void softmax_rows_inplace(Matrix& z) {
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double total = 0.0;
    for (double& v : r) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double& v : r) v /= total;
  }
}

void check_training_inputs(const Matrix& adjacency, const Matrix& x, const Labels& labels,
                           const NodeSet& train_set, int n_classes) {
  if (train_set.empty()) throw NumericError("train: empty training set");
  if (adjacency.rows() != adjacency.cols() || adjacency.rows() != x.rows())
    throw ShapeError("train: adjacency and features disagree on node count");
  if (labels.size() != x.rows()) throw ShapeError("train: labels must cover every node");
  if (n_classes < 1) throw ConfigError("train: need at least one class");
  for (std::size_t v : train_set) {
    if (v >= labels.size()) throw ShapeError("train: training node out of range");
    if (labels[v] < 0 || labels[v] >= n_classes)
      throw DataError("train: label of node " + std::to_string(v) + " out of range");
  }
}

double masked_cross_entropy(const Matrix& probs, const Labels& labels, const NodeSet& on) {
  double loss = 0.0;
  for (std::size_t v : on) loss -= std::log(std::max(probs(v, labels[v]), 1e-300));
  return loss / static_cast<double>(on.size());
}

// One-hot targets and the 1/|S| row mask used by the hand-written surrogate
// gradient (P - Y) * M.
std::pair<Matrix, Matrix> targets_and_mask(std::size_t n, const Labels& labels,
                                           const NodeSet& train_set, int n_classes) {
  Matrix y(n, n_classes);
  Matrix mask(n, n_classes);
  const double w = 1.0 / static_cast<double>(train_set.size());
  for (std::size_t v : train_set) {
    y(v, labels[v]) = 1.0;
    for (double& m : mask.row(v)) m = w;
  }
  return {std::move(y), std::move(mask)};
}

}  // namespace

void TrainConfig::validate() const {
  if (steps < 1) throw ConfigError("train: steps must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("train: learning_rate must be a finite non-negative number");
  if (hidden < 1) throw ConfigError("train: hidden must be >= 1");
}

TrainConfig default_gcn_config() {
  TrainConfig cfg;
  cfg.steps = 200;
  cfg.learning_rate = 0.01;
  cfg.hidden = 16;
  return cfg;
}

TrainConfig default_surrogate_config() {
  TrainConfig cfg;
  cfg.steps = 100;
  cfg.learning_rate = 0.1;
  return cfg;
}

Matrix init_weights(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  const double bound =
      scale > 0.0 ? scale : std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix w(rows, cols);
  for (double& v : w.values()) v = dist(rng);
  return w;
}

Matrix gcn_forward(const GcnModel& model, const Matrix& a_hat, const Matrix& x) {
  Matrix h = matmul(a_hat, matmul(x, model.w0));
  for (double& v : h.values()) v = v > 0.0 ? v : 0.0;
  Matrix z = matmul(a_hat, matmul(h, model.w1));
  softmax_rows_inplace(z);
  return z;
}

Matrix surrogate_forward(const SurrogateModel& model, const Matrix& a_hat, const Matrix& x) {
  Matrix z = matmul(a_hat, matmul(a_hat, matmul(x, model.w)));
  softmax_rows_inplace(z);
  return z;
}

Trained<GcnModel> train_gcn(const Matrix& adjacency, const Matrix& x, const Labels& labels,
                            const NodeSet& train_set, int n_classes, const TrainConfig& cfg) {
  cfg.validate();
  check_training_inputs(adjacency, x, labels, train_set, n_classes);
  Rng rng(cfg.init_seed);
  Trained<GcnModel> out;
  out.model.w0 = init_weights(x.cols(), cfg.hidden, cfg.init_scale, rng);
  out.model.w1 = init_weights(cfg.hidden, n_classes, cfg.init_scale, rng);
  auto a_hat = std::make_shared<const Matrix>(normalize_adjacency(adjacency));
  auto feats = std::make_shared<const Matrix>(x);

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    ad::Tape tape;
    const ad::Var a = tape.leaf(a_hat);
    const ad::Var xv = tape.leaf(feats);
    const ad::Var w0 = tape.leaf(out.model.w0);
    const ad::Var w1 = tape.leaf(out.model.w1);
    const ad::Var hidden = tape.relu(tape.matmul(a, tape.matmul(xv, w0)));
    const ad::Var probs = tape.softmax_rows(tape.matmul(a, tape.matmul(hidden, w1)));
    const ad::Var loss = tape.cross_entropy_masked(probs, labels, train_set);
    out.loss_curve.push_back(tape.value(loss)(0, 0));
    out.accuracy_curve.push_back(accuracy(argmax_rows(tape.value(probs)), labels, train_set));
    const ad::Var wrt[] = {w0, w1};
    auto grads = tape.backward(loss, wrt);
    axpy(-cfg.learning_rate, grads[0], out.model.w0);
    axpy(-cfg.learning_rate, grads[1], out.model.w1);
  }
  return out;
}

Trained<SurrogateModel> train_surrogate(const Matrix& adjacency, const Matrix& x,
                                        const Labels& labels, const NodeSet& train_set,
                                        int n_classes, const TrainConfig& cfg) {
  cfg.validate();
  check_training_inputs(adjacency, x, labels, train_set, n_classes);
  Rng rng(cfg.init_seed);
  Trained<SurrogateModel> out;
  out.model.w = init_weights(x.cols(), n_classes, cfg.init_scale, rng);
  const Matrix a_hat = normalize_adjacency(adjacency);
  const Matrix a_hat_t = transpose(a_hat);
  const Matrix x_t = transpose(x);
  const auto [y, mask] = targets_and_mask(x.rows(), labels, train_set, n_classes);

  // Same operation sequence as inner_train_differentiable.
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    Matrix probs = matmul(a_hat, matmul(a_hat, matmul(x, out.model.w)));
    softmax_rows_inplace(probs);
    out.loss_curve.push_back(masked_cross_entropy(probs, labels, train_set));
    out.accuracy_curve.push_back(accuracy(argmax_rows(probs), labels, train_set));
    const Matrix residual = hadamard(probs - y, mask);
    const Matrix grad = matmul(x_t, matmul(a_hat_t, matmul(a_hat_t, residual)));
    out.model.w = out.model.w - cfg.learning_rate * grad;
  }
  return out;
}

Labels argmax_rows(const Matrix& probs) {
  Labels out(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    auto r = probs.row(i);
    out[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

Labels predict_labels(const GcnModel& model, const Matrix& adjacency, const Matrix& x) {
  return argmax_rows(gcn_forward(model, normalize_adjacency(adjacency), x));
}

Labels predict_labels(const SurrogateModel& model, const Matrix& adjacency, const Matrix& x) {
  return argmax_rows(surrogate_forward(model, normalize_adjacency(adjacency), x));
}

double accuracy(const Labels& pred, const Labels& truth, const NodeSet& on) {
  if (on.empty()) throw NumericError("accuracy: empty node set");
  std::size_t correct = 0;
  for (std::size_t v : on) correct += pred.at(v) == truth.at(v) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(on.size());
}

int class_count(const Labels& labels) {
  int k = 0;
  for (int c : labels) k = std::max(k, c + 1);
  return k;
}

InnerTraining inner_train_differentiable(ad::Tape& tape, ad::Var a_var, const Matrix& x,
                                         const Labels& labels, const NodeSet& train_set,
                                         int n_classes, const TrainConfig& cfg) {
  cfg.validate();
  if (a_var.rows != x.rows() || a_var.cols != x.rows())
    throw ShapeError("inner_train_differentiable: adjacency/features mismatch");
  check_training_inputs(Matrix(x.rows(), x.rows()), x, labels, train_set, n_classes);
  Rng rng(cfg.init_seed);
  Matrix w0 = init_weights(x.cols(), n_classes, cfg.init_scale, rng);
  auto [y, mask] = targets_and_mask(x.rows(), labels, train_set, n_classes);

  const ad::Var a_hat = tape.rsqrt_diag_scale(tape.add_identity(a_var));
  const ad::Var a_hat_t = tape.transpose(a_hat);
  const ad::Var xv = tape.leaf(x);
  const ad::Var x_t = tape.leaf(transpose(x));
  const ad::Var yv = tape.leaf(std::move(y));
  const ad::Var mv = tape.leaf(std::move(mask));
  ad::Var w = tape.leaf(std::move(w0));

  auto forward = [&](ad::Var weights) {
    return tape.softmax_rows(tape.matmul(a_hat, tape.matmul(a_hat, tape.matmul(xv, weights))));
  };
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const ad::Var probs = forward(w);
    const ad::Var residual = tape.hadamard(tape.sub(probs, yv), mv);
    const ad::Var grad =
        tape.matmul(x_t, tape.matmul(a_hat_t, tape.matmul(a_hat_t, residual)));
    w = tape.sub(w, tape.scalar_mul(grad, cfg.learning_rate));
  }
  return InnerTraining{a_hat, w, forward(w)};
}

}  // namespace bbga
