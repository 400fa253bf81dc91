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

// Structure-poisoning attacks. Every attack returns an AttackPlan: the
// ordered flips it chose, the perturbed adjacency and a constraint audit.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbga/graph.hpp"
#include "bbga/matrix.hpp"
#include "bbga/models.hpp"

namespace bbga {

/// Number of edge flips an attack may spend.
struct AttackBudget {
  std::size_t flips = 0;
  std::optional<double> rate;  // set when derived from a perturbation rate

  static AttackBudget from_count(std::size_t flips);
  /// round(rate * n_edges).
  static AttackBudget from_rate(double rate, std::size_t n_edges);
};

/// Valid-flip predicate: removing an edge is always allowed; adding (u,v)
/// requires u != v and Jaccard(x_u, x_v) >= eta.
class Constraint {
 public:
  Constraint(const Matrix& features, double eta);

  double eta() const { return eta_; }
  double jaccard(std::size_t u, std::size_t v) const { return jaccard_(u, v); }
  bool allows(std::size_t u, std::size_t v, bool is_edge) const {
    return u != v && (is_edge || jaccard_(u, v) >= eta_);
  }
  std::size_t n_nodes() const { return jaccard_.rows(); }

 private:
  double eta_;
  Matrix jaccard_;
};

struct Flip {
  std::size_t step = 0;
  std::size_t u = 0;
  std::size_t v = 0;
  double score = 0.0;
  bool was_edge = false;
};

struct FlipAudit {
  std::size_t u = 0;
  std::size_t v = 0;
  bool was_edge = false;
  double jaccard = 0.0;
  bool passed = true;
};

enum class PlanStatus { kComplete, kTruncated };

struct AttackPlan {
  std::string method;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::size_t budget = 0;
  std::vector<Flip> flips;
  Matrix adjacency;  // perturbed
  std::vector<FlipAudit> audit;
  PlanStatus status = PlanStatus::kComplete;
  std::string status_message;
  // Node sets the attacker used (e.g. "attacker_train" for the training fold).
  std::map<std::string, NodeSet> node_sets;

  std::size_t violations() const;
};

/// Applies flips (in order) to a copy of `clean`.
Matrix apply_flips(const Matrix& clean, std::span<const Flip> flips);
/// Jaccard audit of every flip against the original features.
std::vector<FlipAudit> audit_flips(std::span<const Flip> flips, const Constraint& constraint);

nlohmann::json plan_to_json(const AttackPlan& plan);
/// Rebuilds a plan from JSON; the perturbed adjacency is recomputed from `clean`.
AttackPlan plan_from_json(const nlohmann::json& j, const Matrix& clean);

/// Adds `budget` uniformly chosen constraint-valid non-edges.
AttackPlan attack_random(const GraphBundle& g, const AttackBudget& budget,
                         const Constraint& constraint, std::uint64_t seed);

enum class DiceMode { kFree, kControl, kBlackBox };

/// Disconnect-internally / connect-externally. Each flip tosses a fair coin
/// between removing a same-label edge and adding a valid different-label
/// non-edge. kControl places round(0.1 * budget) flips inside `control_set`
/// and the rest with exactly one endpoint in it.
AttackPlan attack_dice(const GraphBundle& g, const AttackBudget& budget,
                       const Constraint& constraint, const Labels& labels, DiceMode mode,
                       const NodeSet& control_set, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Meta-gradient attacks.

// derive_seed tags used under BbgaConfig::master_seed; every random draw of a
// meta attack has its own stream.
namespace seed_tags {
inline constexpr std::uint64_t kPartitionTag = 1;       // {tag}
inline constexpr std::uint64_t kSurrogateSplitTag = 2;  // {tag}
inline constexpr std::uint64_t kSurrogateInitTag = 3;   // {tag}
inline constexpr std::uint64_t kFoldInitTag = 4;        // {tag, step, fold}
inline constexpr std::uint64_t kRandomFoldTag = 5;      // {tag, step}
}  // namespace seed_tags

enum class FoldLabels { kSurrogatePredictions, kClusterLabels };
enum class SigmaFilter { kStrict, kLessEqual, kOff };
enum class MedianScope { kAllPairs, kValidPairs };
enum class FoldSelection { kAll, kFirstOnly, kRandomOne };

struct BbgaConfig {
  std::size_t k = 5;
  TrainConfig inner = default_surrogate_config();  // T and inner learning rate
  std::uint64_t master_seed = 0;
  FoldLabels fold_labels = FoldLabels::kSurrogatePredictions;
  bool refresh_targets = true;
  SigmaFilter sigma_filter = SigmaFilter::kStrict;
  MedianScope median_scope = MedianScope::kAllPairs;
  FoldSelection folds = FoldSelection::kAll;
  // Random training set for the label-generating surrogate.
  double surrogate_train_fraction = 0.1;
  TrainConfig surrogate = default_surrogate_config();
  std::size_t threads = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Seeded partition of [0, n) into k sets whose sizes differ by at most one.
std::vector<NodeSet> bbga_partition(std::size_t n, std::size_t k, std::uint64_t seed);

struct FoldScores {
  Matrix scores;   // S^i, symmetric with zero diagonal
  Matrix meta_gradient;  // symmetrized d CE / d A
  Labels targets;  // pseudo-targets used on V \ V_i
};

/// Trains the surrogate on `fold` (on-tape, cfg.inner) and differentiates
/// CE(V \ fold, targets) back to the adjacency. The attacker drives this CE
/// up. Returns the sign-adjusted scores. When `frozen_targets` is null the
/// targets are the trained surrogate's own predictions.
FoldScores bbga_fold_scores(const Matrix& features, const Matrix& adjacency,
                            const NodeSet& fold, const Labels& train_labels, int n_classes,
                            const TrainConfig& inner, const Labels* frozen_targets = nullptr);

/// S(u,v) = grad(u,v) * (1 - 2 A(u,v)), diagonal zero.
Matrix flip_scores(const Matrix& meta_gradient, const Matrix& adjacency);

struct AggregateResult {
  Matrix scores;
  double sigma_median = 0.0;
};

/// Sums fold scores on pairs whose population standard deviation across folds
/// is below the (lower) median of all off-diagonal pairs; other pairs and the
/// diagonal get 0. `in_scope` optionally restricts which pairs feed the median.
AggregateResult bbga_aggregate(std::span<const Matrix> fold_scores,
                               SigmaFilter filter = SigmaFilter::kStrict,
                               const std::function<bool(std::size_t, std::size_t)>& in_scope = {});

/// Surrogate-predicted labels C_s: a surrogate trained on `pseudo` over a
/// random training set, applied to every node.
Labels surrogate_predictions(const GraphBundle& g, const Labels& pseudo, const BbgaConfig& cfg,
                             NodeSet* train_set_out = nullptr);

/// k-fold greedy meta-gradient attack.
AttackPlan attack_bbga(const GraphBundle& g, const AttackBudget& budget,
                       const Constraint& constraint, const Labels& pseudo,
                       const BbgaConfig& cfg);

/// Black-box Mettack: the same pipeline scoring only the first partition,
/// with no sigma filter.
AttackPlan attack_mettack_bb(const GraphBundle& g, const AttackBudget& budget,
                             const Constraint& constraint, const Labels& pseudo,
                             const BbgaConfig& cfg);

const char* to_string(SigmaFilter f);
const char* to_string(FoldSelection f);
const char* to_string(FoldLabels f);
const char* to_string(DiceMode m);

}  // namespace bbga
