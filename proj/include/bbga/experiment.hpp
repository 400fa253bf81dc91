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

// Experiment grid runner behind `bbga experiment run|compare`.
//
// A config is a JSON object (schema_version 1). Unknown keys are rejected and
// every knob is resolved to an explicit value before anything runs; the
// resolved config is embedded in every artifact.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbga/analysis.hpp"
#include "bbga/attacks.hpp"
#include "bbga/clustering.hpp"
#include "bbga/defense.hpp"
#include "bbga/graph.hpp"

namespace bbga {

inline constexpr int kConfigSchemaVersion = 1;

/// Fills defaults (including preset-specific attack/rate lists) and validates.
/// Throws ConfigError on schema violations.
nlohmann::json resolve_experiment_config(const nlohmann::json& raw);

/// One named attack, e.g. "bbga", "bbga-alpha", "bbga-k7", "dice-control".
struct AttackSpec {
  std::string name;
  enum class Kind { kRandom, kDice, kMettack, kBbga } kind = Kind::kRandom;
  DiceMode dice_mode = DiceMode::kFree;
  BbgaConfig bbga;
};

AttackSpec parse_attack(const std::string& name, const BbgaConfig& base);
BbgaConfig bbga_config_from_json(const nlohmann::json& j);
ClusterConfig cluster_config_from_json(const nlohmann::json& j, std::uint64_t seed);
TrainConfig gcn_config_from_json(const nlohmann::json& j);

/// Loads or generates the dataset described by a resolved config.
GraphBundle experiment_dataset(const nlohmann::json& cfg);

struct ExperimentRun {
  std::string attack;
  double rate = 0.0;
  AttackPlan plan;
  std::vector<LocalPtbReport> local_ptb;
  std::vector<std::pair<std::string, ExperimentReport>> evaluations;  // by defense
};

struct ExperimentResult {
  nlohmann::json config;  // resolved
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  std::optional<PseudoLabelResult> clustering;
  std::vector<ExperimentRun> runs;

  std::vector<AttackSummaryRow> summary_rows() const;
  nlohmann::json report_json() const;
  std::string results_csv() const;
  std::string local_ptb_csv(const std::string& attack) const;
  std::string ranking_csv() const;
};

/// Runs the whole grid in memory.
ExperimentResult run_experiment(const nlohmann::json& resolved);

/// Writes report.json, results.csv and local_ptb_<attack>.csv under `dir`
/// (plus ranking.csv when `with_ranking`). Returns the written paths.
std::vector<std::filesystem::path> write_experiment(const ExperimentResult& result,
                                                    const std::filesystem::path& dir,
                                                    bool with_ranking);

/// Parses the rows of a results.csv produced by write_experiment.
std::vector<AttackSummaryRow> read_results_csv(const std::filesystem::path& path);

}  // namespace bbga
