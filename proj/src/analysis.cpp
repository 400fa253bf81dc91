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

#include "bbga/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "bbga/error.hpp"

namespace bbga {

namespace {

double ratio(std::size_t num, std::size_t den) {
  if (num == 0) return 0.0;
  if (den == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

LocalPtbReport local_perturbation_rates(const Matrix& clean, const Matrix& perturbed,
                                        const NodeSet& set, const std::string& set_name) {
  require_same_shape(clean, perturbed, "local_perturbation_rates");
  const std::size_t n = clean.rows();
  const std::vector<char> in = membership(n, set);
  LocalPtbReport r;
  r.set_name = set_name;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const int inside = in[u] + in[v];
      const bool edge = clean(u, v) != 0.0;
      const bool flipped = (clean(u, v) != 0.0) != (perturbed(u, v) != 0.0);
      r.clean_edges += edge;
      r.total_flips += flipped;
      if (inside == 2) {
        r.inside_edges += edge;
        r.inside_flips += flipped;
      } else if (inside == 1) {
        r.adjacent_edges += edge;
        r.adjacent_flips += flipped;
      }
    }
  }
  r.global_rate = ratio(r.total_flips, r.clean_edges);
  r.inside_rate = ratio(r.inside_flips, r.inside_edges);
  r.adjacent_rate = ratio(r.adjacent_flips, r.adjacent_edges);
  return r;
}

double relative_gap_percent(double value, double best) {
  if (best == 0.0) return 0.0;
  return (value - best) / best * 100.0;
}

std::string format_gap(double percent) {
  // Nudge by a tiny relative amount so values such as 10.71 that sit just
  // below their decimal representation do not truncate to 10.70.
  const double scaled = percent * 100.0;
  const double nudge = std::abs(scaled) * 1e-12 + 1e-9;
  double cents = std::trunc(scaled + (scaled < 0 ? -nudge : nudge));
  if (cents == 0.0) cents = 0.0;  // drop negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f%%", cents / 100.0);
  return buf;
}

std::vector<RankingRow> rank_attacks(const std::vector<AttackSummaryRow>& rows) {
  std::map<std::pair<std::string, double>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i)
    groups[{rows[i].defense, rows[i].rate}].push_back(i);
  std::vector<RankingRow> out;
  for (auto& [key, idx] : groups) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return rows[a].mean_misclassification > rows[b].mean_misclassification;
    });
    const double best = rows[idx.front()].mean_misclassification;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      RankingRow rr;
      rr.row = rows[idx[r]];
      rr.rank = r + 1;
      rr.gap_percent = relative_gap_percent(rr.row.mean_misclassification, best);
      out.push_back(std::move(rr));
    }
  }
  return out;
}

std::string fmt_double(double v, int precision) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string ranking_csv(const std::vector<RankingRow>& ranking, const std::string& header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "defense,rate,rank,attack,mean_misclassification,std_misclassification,gap\n";
  for (const RankingRow& r : ranking) {
    out << r.row.defense << "," << fmt_double(r.row.rate, 4) << "," << r.rank << ","
        << r.row.attack << "," << fmt_double(r.row.mean_misclassification) << ","
        << fmt_double(r.row.std_misclassification) << ","
        << (r.rank == 1 ? std::string("0.00%") : format_gap(r.gap_percent)) << "\n";
  }
  return out.str();
}

}  // namespace bbga
