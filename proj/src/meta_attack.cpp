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

// Meta-gradient greedy attacks: black-box Mettack and the k-fold BBGA.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

#include "bbga/attacks.hpp"
#include "bbga/autodiff.hpp"
#include "bbga/error.hpp"
#include "bbga/parallel.hpp"
#include "bbga/rng.hpp"

namespace bbga {

using nlohmann::json;

namespace {

using namespace seed_tags;

NodeSet complement(std::size_t n, const NodeSet& set) {
  const std::vector<char> in = membership(n, set);
  NodeSet out;
  for (std::size_t v = 0; v < n; ++v)
    if (!in[v]) out.push_back(v);
  return out;
}

}  // namespace

void BbgaConfig::validate() const {
  if (k < 2) throw ConfigError("bbga: k must be >= 2");
  inner.validate();
  surrogate.validate();
  if (!(surrogate_train_fraction > 0.0 && surrogate_train_fraction < 1.0))
    throw ConfigError("bbga: surrogate_train_fraction must be in (0, 1)");
}

json BbgaConfig::to_json() const {
  return json{{"k", k},
              {"T", inner.steps},
              {"inner_lr", inner.learning_rate},
              {"master_seed", master_seed},
              {"fold_labels", to_string(fold_labels)},
              {"refresh_targets", refresh_targets},
              {"sigma_filter", to_string(sigma_filter)},
              {"median_scope", median_scope == MedianScope::kAllPairs ? "all" : "valid"},
              {"folds", to_string(folds)},
              {"surrogate_train_fraction", surrogate_train_fraction},
              {"surrogate_steps", surrogate.steps},
              {"surrogate_lr", surrogate.learning_rate}};
}

std::vector<NodeSet> bbga_partition(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k > n) throw ConfigError("bbga_partition: need 1 <= k <= N");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<NodeSet> parts(k);
  for (std::size_t i = 0; i < n; ++i) parts[i % k].push_back(order[i]);
  for (auto& p : parts) std::sort(p.begin(), p.end());
  return parts;
}

Matrix flip_scores(const Matrix& meta_gradient, const Matrix& adjacency) {
  require_same_shape(meta_gradient, adjacency, "flip_scores");
  Matrix s(adjacency.rows(), adjacency.cols());
  for (std::size_t u = 0; u < s.rows(); ++u)
    for (std::size_t v = 0; v < s.cols(); ++v)
      s(u, v) = u == v ? 0.0 : meta_gradient(u, v) * (-2.0 * adjacency(u, v) + 1.0);
  return s;
}

FoldScores bbga_fold_scores(const Matrix& features, const Matrix& adjacency,
                            const NodeSet& fold, const Labels& train_labels, int n_classes,
                            const TrainConfig& inner, const Labels* frozen_targets) {
  if (fold.empty()) throw ConfigError("bbga_fold_scores: empty fold");
  const NodeSet rest = complement(features.rows(), fold);
  if (rest.empty()) throw ConfigError("bbga_fold_scores: fold covers every node");

  ad::Tape tape;
  const ad::Var a = tape.leaf(adjacency);
  const InnerTraining trained =
      inner_train_differentiable(tape, a, features, train_labels, fold, n_classes, inner);

  FoldScores out;
  out.targets = frozen_targets != nullptr ? *frozen_targets : argmax_rows(tape.value(trained.probs));
  // The attacker minimizes L_atk = -CE, so the greedy step climbs CE itself.
  const ad::Var objective = tape.cross_entropy_masked(trained.probs, out.targets, rest);
  const ad::Var wrt[] = {a};
  const auto grads = tape.backward(objective, wrt);
  out.meta_gradient = ad::grad_symmetrize(grads[0]);
  out.scores = flip_scores(out.meta_gradient, adjacency);
  return out;
}

AggregateResult bbga_aggregate(std::span<const Matrix> fold_scores, SigmaFilter filter,
                               const std::function<bool(std::size_t, std::size_t)>& in_scope) {
  if (fold_scores.empty()) throw ConfigError("bbga_aggregate: no fold scores");
  if (filter != SigmaFilter::kOff && fold_scores.size() < 2)
    throw ConfigError("bbga_aggregate: the sigma filter needs at least two folds");
  const Matrix& first = fold_scores.front();
  if (first.rows() != first.cols()) throw ShapeError("bbga_aggregate: scores must be square");
  for (const Matrix& s : fold_scores) require_same_shape(first, s, "bbga_aggregate");

  const std::size_t n = first.rows();
  const double k = static_cast<double>(fold_scores.size());
  AggregateResult out;
  out.scores = Matrix(n, n);
  Matrix sigma(n, n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      // Shifted by the first fold so identical scores give sigma exactly 0.
      const double base = first(u, v);
      double total = 0.0, shift = 0.0;
      for (const Matrix& s : fold_scores) {
        total += s(u, v);
        shift += s(u, v) - base;
      }
      const double mean = shift / k;
      double var = 0.0;
      for (const Matrix& s : fold_scores) {
        const double d = s(u, v) - base - mean;
        var += d * d;
      }
      sigma(u, v) = std::sqrt(var / k);
      out.scores(u, v) = total;
    }
  }
  if (filter == SigmaFilter::kOff) return out;

  std::vector<double> pool;
  pool.reserve(n * (n - 1) / 2);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (!in_scope || in_scope(u, v)) pool.push_back(sigma(u, v));
  if (pool.empty()) {
    out.scores.fill(0.0);
    return out;
  }
  // Lower median for even counts.
  const std::size_t mid = (pool.size() - 1) / 2;
  std::nth_element(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(mid), pool.end());
  out.sigma_median = pool[mid];
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      const double s = sigma(u, v);
      const bool keep = filter == SigmaFilter::kStrict ? s < out.sigma_median
                                                       : s <= out.sigma_median;
      if (!keep) out.scores(u, v) = 0.0;
    }
  }
  return out;
}

Labels surrogate_predictions(const GraphBundle& g, const Labels& pseudo, const BbgaConfig& cfg,
                             NodeSet* train_set_out) {
  if (pseudo.size() != g.n_nodes) throw ShapeError("surrogate_predictions: label length");
  SplitConfig split;
  split.train_fraction = cfg.surrogate_train_fraction;
  split.val_fraction = std::min(0.5 * (1.0 - cfg.surrogate_train_fraction), 0.1);
  split.seed = derive_seed(cfg.master_seed, {kSurrogateSplitTag});
  NodeSet train = make_random_splits(g.n_nodes, split).at("train");
  if (train.empty()) train.push_back(0);
  TrainConfig tc = cfg.surrogate;
  tc.init_seed = derive_seed(cfg.master_seed, {kSurrogateInitTag});
  const int n_classes = class_count(pseudo);
  auto trained = train_surrogate(g.adjacency, g.features, pseudo, train, n_classes, tc);
  if (train_set_out != nullptr) *train_set_out = train;
  return predict_labels(trained.model, g.adjacency, g.features);
}

namespace {

AttackPlan run_meta_attack(const std::string& method, const GraphBundle& g,
                           const AttackBudget& budget, const Constraint& constraint,
                           const Labels& pseudo, const BbgaConfig& cfg) {
  if (pseudo.size() != g.n_nodes) throw ShapeError(method + ": pseudo-labels must cover V");
  if (constraint.n_nodes() != g.n_nodes) throw ShapeError(method + ": constraint size");
  const std::size_t n = g.n_nodes;

  AttackPlan plan;
  plan.method = method;
  plan.seed = cfg.master_seed;
  plan.budget = budget.flips;
  plan.adjacency = g.adjacency;
  plan.config = cfg.to_json();
  plan.config["budget"] = budget.flips;
  plan.config["eta"] = constraint.eta();
  if (budget.rate) plan.config["rate"] = *budget.rate;
  if (budget.flips == 0) return plan;

  NodeSet surrogate_train;
  const Labels cs = surrogate_predictions(g, pseudo, cfg, &surrogate_train);
  const Labels& fold_labels = cfg.fold_labels == FoldLabels::kSurrogatePredictions ? cs : pseudo;
  const int n_classes = std::max(class_count(pseudo), class_count(fold_labels));
  const std::vector<NodeSet> parts =
      bbga_partition(n, cfg.k, derive_seed(cfg.master_seed, {kPartitionTag}));
  plan.node_sets["surrogate_train"] = surrogate_train;
  plan.node_sets["attacker_train"] = parts.front();
  for (std::size_t i = 0; i < parts.size(); ++i)
    plan.node_sets["fold_" + std::to_string(i)] = parts[i];

  std::vector<char> flipped(n * n, 0);
  std::vector<Labels> frozen(parts.size());
  std::vector<char> have_frozen(parts.size(), 0);
  std::function<bool(std::size_t, std::size_t)> scope;
  if (cfg.median_scope == MedianScope::kValidPairs)
    scope = [&](std::size_t u, std::size_t v) {
      return !flipped[u * n + v] && constraint.allows(u, v, plan.adjacency(u, v) != 0.0);
    };

  for (std::size_t step = 0; step < budget.flips; ++step) {
    std::vector<std::size_t> active;
    switch (cfg.folds) {
      case FoldSelection::kAll:
        active.resize(parts.size());
        std::iota(active.begin(), active.end(), 0);
        break;
      case FoldSelection::kFirstOnly:
        active = {0};
        break;
      case FoldSelection::kRandomOne: {
        Rng rng(derive_seed(cfg.master_seed, {kRandomFoldTag, step}));
        std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1);
        active = {pick(rng)};
        break;
      }
    }

    std::vector<FoldScores> results(active.size());
    parallel_for(active.size(), cfg.threads, [&](std::size_t slot) {
      const std::size_t fold = active[slot];
      TrainConfig inner = cfg.inner;
      inner.init_seed = derive_seed(cfg.master_seed, {kFoldInitTag, step, fold});
      const Labels* targets = (!cfg.refresh_targets && have_frozen[fold]) ? &frozen[fold] : nullptr;
      results[slot] = bbga_fold_scores(g.features, plan.adjacency, parts[fold], fold_labels,
                                       n_classes, inner, targets);
    });
    std::vector<Matrix> fold_scores;
    fold_scores.reserve(results.size());
    for (std::size_t slot = 0; slot < results.size(); ++slot) {
      const std::size_t fold = active[slot];
      if (!cfg.refresh_targets && !have_frozen[fold]) {
        frozen[fold] = results[slot].targets;
        have_frozen[fold] = 1;
      }
      fold_scores.push_back(std::move(results[slot].scores));
    }

    const SigmaFilter filter = fold_scores.size() < 2 ? SigmaFilter::kOff : cfg.sigma_filter;
    const AggregateResult agg = bbga_aggregate(fold_scores, filter, scope);

    // Argmax over valid, not-yet-flipped pairs; ties keep the first (u, v).
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_u = 0, best_v = 0;
    bool any_valid = false;
    bool any_nonzero = false;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (flipped[u * n + v]) continue;
        if (!constraint.allows(u, v, plan.adjacency(u, v) != 0.0)) continue;
        const double s = agg.scores(u, v);
        any_valid = true;
        any_nonzero = any_nonzero || s != 0.0;
        if (s > best) {
          best = s;
          best_u = u;
          best_v = v;
        }
      }
    }
    if (!any_valid || !any_nonzero) {
      plan.status = PlanStatus::kTruncated;
      plan.status_message = !any_valid ? "no valid pairs left to flip"
                                       : "every valid score is zero after aggregation";
      std::cerr << "warning: " << method << " stopped after " << plan.flips.size() << " of "
                << budget.flips << " flips: " << plan.status_message << "\n";
      break;
    }
    flipped[best_u * n + best_v] = flipped[best_v * n + best_u] = 1;
    const bool was_edge = plan.adjacency(best_u, best_v) != 0.0;
    plan.adjacency(best_u, best_v) = plan.adjacency(best_v, best_u) = was_edge ? 0.0 : 1.0;
    plan.flips.push_back(Flip{step, best_u, best_v, best, was_edge});
  }
  plan.audit = audit_flips(plan.flips, constraint);
  return plan;
}

}  // namespace

AttackPlan attack_bbga(const GraphBundle& g, const AttackBudget& budget,
                       const Constraint& constraint, const Labels& pseudo,
                       const BbgaConfig& cfg) {
  cfg.validate();
  std::string name = "bbga";
  if (cfg.folds == FoldSelection::kRandomOne)
    name = "bbga-beta";
  else if (cfg.sigma_filter == SigmaFilter::kOff)
    name = "bbga-alpha";
  return run_meta_attack(name, g, budget, constraint, pseudo, cfg);
}

AttackPlan attack_mettack_bb(const GraphBundle& g, const AttackBudget& budget,
                             const Constraint& constraint, const Labels& pseudo,
                             const BbgaConfig& cfg) {
  BbgaConfig mcfg = cfg;
  mcfg.folds = FoldSelection::kFirstOnly;
  mcfg.sigma_filter = SigmaFilter::kOff;
  mcfg.validate();
  return run_meta_attack("mettack-bb", g, budget, constraint, pseudo, mcfg);
}

}  // namespace bbga
