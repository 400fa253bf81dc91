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
#include <string>
#include <vector>

#include "bbga/graph.hpp"
#include "bbga/matrix.hpp"

namespace bbga {

/// Flip density inside / around a node set relative to its clean edges.
/// Rates may exceed 1; an empty denominator yields +infinity.
struct LocalPtbReport {
  std::string set_name;
  double global_rate = 0.0;
  double inside_rate = 0.0;
  double adjacent_rate = 0.0;
  std::size_t total_flips = 0;
  std::size_t clean_edges = 0;
  std::size_t inside_flips = 0;
  std::size_t inside_edges = 0;
  std::size_t adjacent_flips = 0;
  std::size_t adjacent_edges = 0;
};

LocalPtbReport local_perturbation_rates(const Matrix& clean, const Matrix& perturbed,
                                        const NodeSet& set, const std::string& set_name = "set");

struct AttackSummaryRow {
  std::string attack;
  std::string defense;
  double rate = 0.0;
  double mean_misclassification = 0.0;
  double std_misclassification = 0.0;
};

struct RankingRow {
  AttackSummaryRow row;
  std::size_t rank = 0;  // 1 = strongest attack in its (defense, rate) group
  double gap_percent = 0.0;
};

/// (value - best) / best in percent.
double relative_gap_percent(double value, double best);
/// Two decimals truncated toward zero with a percent sign, e.g. "-10.37%".
std::string format_gap(double percent);

/// Ranks attacks by mean misclassification within each (defense, rate)
/// group; the gap is measured against the group's best attack.
std::vector<RankingRow> rank_attacks(const std::vector<AttackSummaryRow>& rows);
std::string ranking_csv(const std::vector<RankingRow>& ranking, const std::string& header_comment);

/// Fixed-precision rendering used in every CSV so reruns are byte-identical.
std::string fmt_double(double v, int precision = 6);

}  // namespace bbga
