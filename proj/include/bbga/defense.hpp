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
#include <string>
#include <vector>

#include <json.hpp>

#include "bbga/attacks.hpp"
#include "bbga/graph.hpp"
#include "bbga/models.hpp"

namespace bbga {

/// Drops every edge whose endpoints have Jaccard similarity below eta.
Matrix jaccard_filter(const Matrix& adjacency, const Matrix& features, double eta);
GraphBundle jaccard_preprocess(const GraphBundle& g, double eta);

enum class Defense { kNone, kJaccard, kFlip };
const char* to_string(Defense d);
Defense parse_defense(const std::string& name);

/// Flip-GCN: trains on the "val" split (with "train" as the held-out
/// validation set). Requires labels and both splits.
Trained<GcnModel> flip_train(const GraphBundle& g, const TrainConfig& cfg);
/// Standard training on the "train" split.
Trained<GcnModel> standard_train(const GraphBundle& g, const TrainConfig& cfg);

/// Applies `defense` to `g` (whose adjacency may already be poisoned), trains
/// a GCN accordingly and returns accuracy on the "test" split.
double defended_test_accuracy(const GraphBundle& g, Defense defense, double eta,
                              const TrainConfig& cfg);

struct EvaluationConfig {
  Defense defense = Defense::kNone;
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  double eta = 0.01;
  TrainConfig gcn = default_gcn_config();
  double train_fraction = 0.10;
  double val_fraction = 0.10;
  // false keeps the bundle's own splits and only re-seeds the GCN per trial.
  bool resplit = true;
  std::size_t threads = 0;

  nlohmann::json to_json() const;
};

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  double accuracy = 0.0;
};

struct ExperimentReport {
  nlohmann::json config = nlohmann::json::object();
  std::vector<TrialResult> per_trial;
  double mean = 0.0;  // accuracy
  double std = 0.0;   // population std of accuracy
  double mean_misclassification() const { return 1.0 - mean; }

  nlohmann::json to_json() const;
};

/// Poisoning evaluation: for each trial draw a fresh split, apply the
/// defense to the perturbed graph, train a GCN and score the test split.
ExperimentReport evaluate_poisoned(const GraphBundle& clean, const AttackPlan& plan,
                                   const EvaluationConfig& cfg);

/// Population mean / standard deviation.
std::pair<double, double> mean_and_std(const std::vector<double>& values);

}  // namespace bbga
