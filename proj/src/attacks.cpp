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

#include "bbga/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bbga/error.hpp"
#include "bbga/rng.hpp"

namespace bbga {

using nlohmann::json;

AttackBudget AttackBudget::from_count(std::size_t flips) { return AttackBudget{flips, {}}; }

AttackBudget AttackBudget::from_rate(double rate, std::size_t n_edges) {
  if (!(rate >= 0.0) || !std::isfinite(rate))
    throw ConfigError("budget: perturbation rate must be a finite non-negative number");
  return AttackBudget{static_cast<std::size_t>(std::llround(rate * static_cast<double>(n_edges))),
                      rate};
}

Constraint::Constraint(const Matrix& features, double eta)
    : eta_(eta), jaccard_(jaccard_matrix(features)) {
  if (!std::isfinite(eta)) throw ConfigError("constraint: eta must be finite");
}

std::size_t AttackPlan::violations() const {
  return static_cast<std::size_t>(
      std::count_if(audit.begin(), audit.end(), [](const FlipAudit& a) { return !a.passed; }));
}

Matrix apply_flips(const Matrix& clean, std::span<const Flip> flips) {
  Matrix a = clean;
  for (const Flip& f : flips) {
    if (f.u >= a.rows() || f.v >= a.rows() || f.u == f.v)
      throw DataError("apply_flips: invalid pair (" + std::to_string(f.u) + "," +
                      std::to_string(f.v) + ")");
    const double nv = a(f.u, f.v) != 0.0 ? 0.0 : 1.0;
    a(f.u, f.v) = nv;
    a(f.v, f.u) = nv;
  }
  return a;
}

std::vector<FlipAudit> audit_flips(std::span<const Flip> flips, const Constraint& constraint) {
  std::vector<FlipAudit> out;
  out.reserve(flips.size());
  for (const Flip& f : flips) {
    FlipAudit a;
    a.u = f.u;
    a.v = f.v;
    a.was_edge = f.was_edge;
    a.jaccard = constraint.jaccard(f.u, f.v);
    a.passed = constraint.allows(f.u, f.v, f.was_edge);
    out.push_back(a);
  }
  return out;
}

const char* to_string(SigmaFilter f) {
  switch (f) {
    case SigmaFilter::kStrict: return "strict";
    case SigmaFilter::kLessEqual: return "lte";
    case SigmaFilter::kOff: return "off";
  }
  return "?";
}

const char* to_string(FoldSelection f) {
  switch (f) {
    case FoldSelection::kAll: return "all";
    case FoldSelection::kFirstOnly: return "first";
    case FoldSelection::kRandomOne: return "random_one";
  }
  return "?";
}

const char* to_string(FoldLabels f) {
  return f == FoldLabels::kSurrogatePredictions ? "surrogate_preds" : "cluster_labels";
}

const char* to_string(DiceMode m) {
  switch (m) {
    case DiceMode::kFree: return "free";
    case DiceMode::kControl: return "control";
    case DiceMode::kBlackBox: return "blackbox";
  }
  return "?";
}

json plan_to_json(const AttackPlan& plan) {
  json flips = json::array();
  for (const Flip& f : plan.flips)
    flips.push_back({{"step", f.step}, {"u", f.u}, {"v", f.v}, {"score", f.score},
                     {"was_edge", f.was_edge}});
  json sets = json::object();
  for (const auto& [name, nodes] : plan.node_sets) sets[name] = nodes;
  const std::size_t added = static_cast<std::size_t>(std::count_if(
      plan.flips.begin(), plan.flips.end(), [](const Flip& f) { return !f.was_edge; }));
  json summary{{"method", plan.method},
               {"budget", plan.budget},
               {"n_flips", plan.flips.size()},
               {"n_added", added},
               {"n_removed", plan.flips.size() - added},
               {"constraint_violations", plan.violations()},
               {"status", plan.status == PlanStatus::kComplete ? "complete" : "truncated"},
               {"status_message", plan.status_message}};
  return json{{"config", plan.config}, {"seed", plan.seed}, {"flips", std::move(flips)},
              {"node_sets", std::move(sets)}, {"summary", std::move(summary)}};
}

AttackPlan plan_from_json(const json& j, const Matrix& clean) {
  AttackPlan plan;
  try {
    plan.config = j.value("config", json::object());
    plan.seed = j.at("seed").get<std::uint64_t>();
    const json& summary = j.at("summary");
    plan.method = summary.at("method").get<std::string>();
    plan.budget = summary.at("budget").get<std::size_t>();
    plan.status = summary.value("status", "complete") == "complete" ? PlanStatus::kComplete
                                                                    : PlanStatus::kTruncated;
    plan.status_message = summary.value("status_message", "");
    for (const json& f : j.at("flips")) {
      plan.flips.push_back(Flip{f.at("step").get<std::size_t>(), f.at("u").get<std::size_t>(),
                                f.at("v").get<std::size_t>(), f.at("score").get<double>(),
                                f.at("was_edge").get<bool>()});
    }
    if (j.contains("node_sets"))
      for (const auto& [name, nodes] : j["node_sets"].items())
        plan.node_sets[name] = nodes.get<NodeSet>();
  } catch (const json::exception& e) {
    throw DataError(std::string("attack plan: ") + e.what());
  }
  for (const Flip& f : plan.flips) {
    if (f.u >= clean.rows() || f.v >= clean.rows())
      throw DataError("attack plan: flip endpoint out of range for this graph");
    if ((clean(f.u, f.v) != 0.0) != f.was_edge)
      throw DataError("attack plan: flip (" + std::to_string(f.u) + "," + std::to_string(f.v) +
                      ") does not match the clean graph");
  }
  plan.adjacency = apply_flips(clean, plan.flips);
  return plan;
}

namespace {

AttackPlan start_plan(const std::string& method, const GraphBundle& g,
                      const AttackBudget& budget, std::uint64_t seed) {
  AttackPlan plan;
  plan.method = method;
  plan.seed = seed;
  plan.budget = budget.flips;
  plan.adjacency = g.adjacency;
  plan.config = json{{"budget", budget.flips}};
  if (budget.rate) plan.config["rate"] = *budget.rate;
  return plan;
}

void push_flip(AttackPlan& plan, std::size_t u, std::size_t v, double score) {
  if (u > v) std::swap(u, v);
  const bool was_edge = plan.adjacency(u, v) != 0.0;
  const double nv = was_edge ? 0.0 : 1.0;
  plan.adjacency(u, v) = nv;
  plan.adjacency(v, u) = nv;
  plan.flips.push_back(Flip{plan.flips.size(), u, v, score, was_edge});
}

}  // namespace

AttackPlan attack_random(const GraphBundle& g, const AttackBudget& budget,
                         const Constraint& constraint, std::uint64_t seed) {
  AttackPlan plan = start_plan("random", g, budget, seed);
  plan.config["eta"] = constraint.eta();
  if (budget.flips == 0) return plan;
  std::vector<Edge> pool;
  for (std::size_t u = 0; u < g.n_nodes; ++u)
    for (std::size_t v = u + 1; v < g.n_nodes; ++v)
      if (g.adjacency(u, v) == 0.0 && constraint.allows(u, v, false)) pool.emplace_back(u, v);
  if (pool.size() < budget.flips)
    throw PoolExhausted("random attack: only " + std::to_string(pool.size()) +
                        " valid non-edges for a budget of " + std::to_string(budget.flips));
  Rng rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  for (std::size_t i = 0; i < budget.flips; ++i) push_flip(plan, pool[i].first, pool[i].second, 0.0);
  plan.audit = audit_flips(plan.flips, constraint);
  return plan;
}

AttackPlan attack_dice(const GraphBundle& g, const AttackBudget& budget,
                       const Constraint& constraint, const Labels& labels, DiceMode mode,
                       const NodeSet& control_set, std::uint64_t seed) {
  const std::string method = std::string("dice-") + to_string(mode);
  AttackPlan plan = start_plan(method, g, budget, seed);
  plan.config["eta"] = constraint.eta();
  plan.config["mode"] = to_string(mode);
  if (labels.size() != g.n_nodes) throw ShapeError("dice: labels must cover every node");
  if (mode == DiceMode::kControl) {
    if (control_set.empty()) throw ConfigError("dice-control: control set is empty");
    plan.node_sets["control"] = control_set;
  }

  // Location categories: 0 = anywhere (free), 1 = both endpoints in the
  // control set, 2 = exactly one endpoint in it.
  const std::vector<char> in = membership(g.n_nodes, control_set);
  auto category = [&](std::size_t u, std::size_t v) -> int {
    if (mode != DiceMode::kControl) return 0;
    const int inside = in[u] + in[v];
    return inside == 2 ? 1 : inside == 1 ? 2 : -1;
  };
  std::vector<Edge> removals[3];
  std::vector<Edge> additions[3];
  for (std::size_t u = 0; u < g.n_nodes; ++u) {
    for (std::size_t v = u + 1; v < g.n_nodes; ++v) {
      const int c = category(u, v);
      if (c < 0) continue;
      const bool edge = g.adjacency(u, v) != 0.0;
      if (edge && labels[u] == labels[v])
        removals[c].emplace_back(u, v);
      else if (!edge && labels[u] != labels[v] && constraint.allows(u, v, false))
        additions[c].emplace_back(u, v);
    }
  }
  Rng rng(seed);
  for (int c = 0; c < 3; ++c) {
    std::shuffle(removals[c].begin(), removals[c].end(), rng);
    std::shuffle(additions[c].begin(), additions[c].end(), rng);
  }

  std::vector<int> slots;
  if (mode == DiceMode::kControl) {
    const auto within =
        static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(budget.flips)));
    slots.assign(within, 1);
    slots.resize(budget.flips, 2);
    std::shuffle(slots.begin(), slots.end(), rng);
  } else {
    slots.assign(budget.flips, 0);
  }

  std::bernoulli_distribution coin(0.5);
  for (int c : slots) {
    const bool want_removal = coin(rng);
    std::vector<Edge>* first = want_removal ? &removals[c] : &additions[c];
    std::vector<Edge>* second = want_removal ? &additions[c] : &removals[c];
    std::vector<Edge>* pool = !first->empty() ? first : second;
    if (pool->empty())
      throw PoolExhausted(method + ": no eligible pairs left after " +
                          std::to_string(plan.flips.size()) + " flips");
    const Edge e = pool->back();
    pool->pop_back();
    push_flip(plan, e.first, e.second, 0.0);
  }
  plan.audit = audit_flips(plan.flips, constraint);
  return plan;
}

}  // namespace bbga
