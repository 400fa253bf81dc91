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

#include "bbga/defense.hpp"

#include <cmath>

#include "bbga/error.hpp"
#include "bbga/parallel.hpp"
#include "bbga/rng.hpp"

namespace bbga {

using nlohmann::json;

Matrix jaccard_filter(const Matrix& adjacency, const Matrix& features, double eta) {
  const Matrix sim = jaccard_matrix(features);
  Matrix out = adjacency;
  for (std::size_t u = 0; u < out.rows(); ++u)
    for (std::size_t v = 0; v < out.cols(); ++v)
      if (out(u, v) != 0.0 && sim(u, v) < eta) out(u, v) = 0.0;
  return out;
}

GraphBundle jaccard_preprocess(const GraphBundle& g, double eta) {
  GraphBundle out = g;
  out.adjacency = jaccard_filter(g.adjacency, g.features, eta);
  return out;
}

const char* to_string(Defense d) {
  switch (d) {
    case Defense::kNone: return "none";
    case Defense::kJaccard: return "jaccard";
    case Defense::kFlip: return "flip";
  }
  return "?";
}

Defense parse_defense(const std::string& name) {
  if (name == "none") return Defense::kNone;
  if (name == "jaccard") return Defense::kJaccard;
  if (name == "flip") return Defense::kFlip;
  throw ConfigError("unknown defense '" + name + "' (expected none|jaccard|flip)");
}

namespace {

const Labels& require_labels(const GraphBundle& g) {
  if (!g.labels) throw DataError("training a GCN needs ground-truth labels");
  return *g.labels;
}

int classes_of(const GraphBundle& g) {
  return g.n_classes ? *g.n_classes : class_count(require_labels(g));
}

}  // namespace

Trained<GcnModel> flip_train(const GraphBundle& g, const TrainConfig& cfg) {
  (void)g.split("train");
  return train_gcn(g.adjacency, g.features, require_labels(g), g.split("val"), classes_of(g), cfg);
}

Trained<GcnModel> standard_train(const GraphBundle& g, const TrainConfig& cfg) {
  return train_gcn(g.adjacency, g.features, require_labels(g), g.split("train"), classes_of(g),
                   cfg);
}

double defended_test_accuracy(const GraphBundle& g, Defense defense, double eta,
                              const TrainConfig& cfg) {
  const GraphBundle input = defense == Defense::kJaccard ? jaccard_preprocess(g, eta) : g;
  const Trained<GcnModel> trained =
      defense == Defense::kFlip ? flip_train(input, cfg) : standard_train(input, cfg);
  const Labels pred = predict_labels(trained.model, input.adjacency, input.features);
  return accuracy(pred, *input.labels, input.split("test"));
}

json EvaluationConfig::to_json() const {
  return json{{"defense", to_string(defense)},
              {"trials", trials},
              {"seed", seed},
              {"eta", eta},
              {"gcn", {{"steps", gcn.steps}, {"lr", gcn.learning_rate}, {"hidden", gcn.hidden}}},
              {"train_fraction", train_fraction},
              {"val_fraction", val_fraction},
              {"resplit", resplit}};
}

json ExperimentReport::to_json() const {
  json trials = json::array();
  for (const TrialResult& t : per_trial)
    trials.push_back({{"trial", t.trial},
                      {"seed", t.seed},
                      {"split_seed", t.split_seed},
                      {"accuracy", t.accuracy}});
  return json{{"config", config},
              {"per_trial", std::move(trials)},
              {"mean", mean},
              {"std", std},
              {"mean_misclassification", mean_misclassification()}};
}

std::pair<double, double> mean_and_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

ExperimentReport evaluate_poisoned(const GraphBundle& clean, const AttackPlan& plan,
                                   const EvaluationConfig& cfg) {
  if (cfg.trials == 0) throw ConfigError("evaluate: trials must be >= 1");
  require_labels(clean);
  GraphBundle poisoned = clean;
  poisoned.adjacency = apply_flips(clean.adjacency, plan.flips);

  ExperimentReport report;
  report.config = cfg.to_json();
  report.config["attack"] = plan.method;
  report.config["n_flips"] = plan.flips.size();
  report.per_trial.resize(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t trial) {
    TrialResult& r = report.per_trial[trial];
    r.trial = trial;
    r.seed = derive_seed(cfg.seed, {trial, 2});
    r.split_seed = derive_seed(cfg.seed, {trial, 1});
    GraphBundle g = poisoned;
    if (cfg.resplit) {
      g.splits = make_random_splits(g.n_nodes, {cfg.train_fraction, cfg.val_fraction, r.split_seed});
    } else {
      r.split_seed = 0;
    }
    TrainConfig tc = cfg.gcn;
    tc.init_seed = r.seed;
    r.accuracy = defended_test_accuracy(g, cfg.defense, cfg.eta, tc);
  });
  std::vector<double> acc;
  for (const TrialResult& t : report.per_trial) acc.push_back(t.accuracy);
  std::tie(report.mean, report.std) = mean_and_std(acc);
  return report;
}

}  // namespace bbga
