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

#include "bbga/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bbga/error.hpp"
#include "bbga/kernels.hpp"
#include "bbga/rng.hpp"
#include "bbga/sym_eigen.hpp"

namespace bbga {

void ClusterConfig::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("cluster: gamma must be positive");
  if (candidate_k.empty()) throw ConfigError("cluster: candidate_k must be nonempty");
  for (std::size_t k : candidate_k)
    if (k < 2) throw ConfigError("cluster: candidate k values must be >= 2");
  if (kmeans_restarts < 1 || kmeans_iters < 1)
    throw ConfigError("cluster: kmeans_restarts and kmeans_iters must be >= 1");
}

Matrix rbf_affinity(const Matrix& x, double gamma) {
  const std::size_t n = x.rows();
  const auto& k = kernels::active();
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    w(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = k.squared_distance(x.row(i).data(), x.row(j).data(), x.cols());
      w(i, j) = w(j, i) = std::exp(-gamma * d2);
    }
  }
  return w;
}

LaplacianSpectrum laplacian_spectrum(const Matrix& affinity) {
  if (affinity.rows() != affinity.cols())
    throw ShapeError("laplacian_spectrum: affinity must be square");
  const std::size_t n = affinity.rows();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (double v : affinity.row(i)) d += v;
    if (!(d > 0.0)) throw NumericError("spectral_embed: zero-degree row " + std::to_string(i));
    inv_sqrt[i] = 1.0 / std::sqrt(d);
  }
  Matrix lap(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      lap(i, j) = (i == j ? 1.0 : 0.0) - affinity(i, j) * inv_sqrt[i] * inv_sqrt[j];
  SymEigen eig = sym_eigen(lap);
  return LaplacianSpectrum{std::move(eig.values), std::move(eig.vectors)};
}

Matrix spectral_embed(const LaplacianSpectrum& spectrum, std::size_t k) {
  const std::size_t n = spectrum.vectors.rows();
  if (k == 0 || k >= n)
    throw ConfigError("spectral_embed: need 0 < k < N (k=" + std::to_string(k) +
                      ", N=" + std::to_string(n) + ")");
  Matrix out(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out(i, j) = spectrum.vectors(i, j);
      norm += out(i, j) * out(i, j);
    }
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (double& v : out.row(i)) v /= norm;
  }
  return out;
}

Matrix spectral_embed(const Matrix& affinity, std::size_t k) {
  if (k >= affinity.rows())
    throw ConfigError("spectral_embed: need k < N");
  return spectral_embed(laplacian_spectrum(affinity), k);
}

namespace {

struct LloydRun {
  std::vector<int> labels;
  double wcss = 0.0;
  std::vector<double> trace;
};

LloydRun lloyd(const Matrix& points, std::size_t k, std::size_t max_iters, Rng& rng) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  const auto& kern = kernels::active();
  auto dist2 = [&](std::size_t p, const Matrix& centers, std::size_t c) {
    return kern.squared_distance(points.row(p).data(), centers.row(c).data(), dim);
  };

  // Farthest-first seeding from a random start point.
  Matrix centers(k, dim);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const std::size_t first = pick(rng);
  std::copy(points.row(first).begin(), points.row(first).end(), centers.row(0).begin());
  std::vector<double> nearest(n);
  for (std::size_t p = 0; p < n; ++p) nearest[p] = dist2(p, centers, 0);
  for (std::size_t c = 1; c < k; ++c) {
    const std::size_t far =
        static_cast<std::size_t>(std::max_element(nearest.begin(), nearest.end()) - nearest.begin());
    std::copy(points.row(far).begin(), points.row(far).end(), centers.row(c).begin());
    for (std::size_t p = 0; p < n; ++p) nearest[p] = std::min(nearest[p], dist2(p, centers, c));
  }

  LloydRun run;
  run.labels.assign(n, -1);
  std::vector<double> cost(n);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    double wcss = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      int best = 0;
      double best_d = dist2(p, centers, 0);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = dist2(p, centers, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (run.labels[p] != best) changed = true;
      run.labels[p] = best;
      cost[p] = best_d;
      wcss += best_d;
    }
    run.trace.push_back(wcss);
    run.wcss = wcss;
    if (!changed && iter > 0) break;

    Matrix sums(k, dim);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t p = 0; p < n; ++p) {
      const auto c = static_cast<std::size_t>(run.labels[p]);
      kern.axpy(1.0, points.row(p).data(), sums.row(c).data(), dim);
      ++counts[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < dim; ++j) centers(c, j) = sums(c, j) / counts[c];
        continue;
      }
      // Empty cluster: move it onto the worst-served point, if any is off-center.
      const std::size_t far =
          static_cast<std::size_t>(std::max_element(cost.begin(), cost.end()) - cost.begin());
      if (cost[far] <= 0.0) continue;
      std::copy(points.row(far).begin(), points.row(far).end(), centers.row(c).begin());
      cost[far] = 0.0;
    }
  }
  return run;
}

std::vector<int> relabel_by_first_appearance(const std::vector<int>& labels) {
  std::vector<int> remap;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    if (c >= remap.size()) remap.resize(c + 1, -1);
    if (remap[c] < 0) remap[c] = *std::max_element(remap.begin(), remap.end()) + 1;
    out[i] = remap[c];
  }
  return out;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, const ClusterConfig& cfg) {
  if (points.rows() == 0) throw NumericError("kmeans: empty input");
  if (k == 0 || k > points.rows()) throw ConfigError("kmeans: need 1 <= k <= N");
  KMeansResult best;
  bool have = false;
  for (std::size_t r = 0; r < cfg.kmeans_restarts; ++r) {
    Rng rng(derive_seed(cfg.seed, {r}));
    LloydRun run = lloyd(points, k, cfg.kmeans_iters, rng);
    if (!have || run.wcss < best.wcss) {
      best.labels = std::move(run.labels);
      best.wcss = run.wcss;
      best.objective_trace = std::move(run.trace);
      have = true;
    }
  }
  best.labels = relabel_by_first_appearance(best.labels);
  return best;
}

double calinski_harabasz(const Matrix& points, const std::vector<int>& labels) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  if (labels.size() != n) throw ShapeError("calinski_harabasz: one label per point required");
  int max_label = -1;
  for (int c : labels) {
    if (c < 0) throw NumericError("calinski_harabasz: negative cluster id");
    max_label = std::max(max_label, c);
  }
  const auto slots = static_cast<std::size_t>(max_label + 1);
  std::vector<std::size_t> counts(slots, 0);
  Matrix centroids(slots, dim);
  std::vector<double> mean(dim, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    const auto c = static_cast<std::size_t>(labels[p]);
    ++counts[c];
    for (std::size_t j = 0; j < dim; ++j) {
      centroids(c, j) += points(p, j);
      mean[j] += points(p, j);
    }
  }
  std::size_t clusters = 0;
  for (std::size_t c = 0; c < slots; ++c) {
    if (counts[c] == 0) continue;
    ++clusters;
    for (double& v : centroids.row(c)) v /= static_cast<double>(counts[c]);
  }
  if (clusters < 2) throw NumericError("calinski_harabasz: need at least two clusters");
  for (double& v : mean) v /= static_cast<double>(n);

  double between = 0.0;
  for (std::size_t c = 0; c < slots; ++c) {
    if (counts[c] == 0) continue;
    double d2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) d2 += (centroids(c, j) - mean[j]) * (centroids(c, j) - mean[j]);
    between += static_cast<double>(counts[c]) * d2;
  }
  double within = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const auto c = static_cast<std::size_t>(labels[p]);
    for (std::size_t j = 0; j < dim; ++j)
      within += (points(p, j) - centroids(c, j)) * (points(p, j) - centroids(c, j));
  }
  if (within == 0.0) return std::numeric_limits<double>::infinity();
  return (between / static_cast<double>(clusters - 1)) /
         (within / static_cast<double>(n - clusters));
}

ClusterConfig::ScoreSpace parse_score_space(const std::string& name) {
  if (name == "input") return ClusterConfig::ScoreSpace::kInput;
  if (name == "embedding") return ClusterConfig::ScoreSpace::kEmbedding;
  throw ConfigError("unknown score space '" + name + "' (input | embedding)");
}

PseudoLabelResult cluster_points(const Matrix& points, const ClusterConfig& cfg,
                                 const Matrix* adjacency) {
  cfg.validate();
  const std::size_t n = points.rows();
  Matrix affinity = rbf_affinity(points, cfg.gamma);
  if (adjacency != nullptr) {
    require_same_shape(affinity, *adjacency, "cluster_points");
    for (std::size_t i = 0; i < affinity.size(); ++i)
      affinity.data()[i] = 0.5 * (affinity.data()[i] + adjacency->data()[i]);
  }
  const LaplacianSpectrum spectrum = laplacian_spectrum(affinity);

  std::vector<std::size_t> ks = cfg.candidate_k;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  PseudoLabelResult result;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k : ks) {
    if (k >= n) continue;
    const Matrix embedding = spectral_embed(spectrum, k);
    KMeansResult km = kmeans(embedding, k, cfg);
    double score = -std::numeric_limits<double>::infinity();
    if (*std::max_element(km.labels.begin(), km.labels.end()) >= 1)
      score = calinski_harabasz(
          cfg.score_space == ClusterConfig::ScoreSpace::kInput ? points : embedding, km.labels);
    result.scores.push_back({k, score});
    if (result.labels.empty() || score > best_score) {
      best_score = score;
      result.labels = std::move(km.labels);
      result.chosen_k = k;
    }
  }
  if (result.labels.empty())
    throw ConfigError("cluster: every candidate k is >= the number of nodes");
  return result;
}

PseudoLabelResult pseudo_labels(const GraphBundle& g, const ClusterConfig& cfg) {
  return cluster_points(g.features, cfg, cfg.mix_adjacency ? &g.adjacency : nullptr);
}

}  // namespace bbga
