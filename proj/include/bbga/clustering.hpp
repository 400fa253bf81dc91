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

#include "bbga/graph.hpp"
#include "bbga/matrix.hpp"

namespace bbga {

struct ClusterConfig {
  double gamma = 0.001;
  std::vector<std::size_t> candidate_k{2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t kmeans_restarts = 10;
  std::size_t kmeans_iters = 100;
  std::uint64_t seed = 0;
  // Average the binary adjacency into the feature affinity.
  bool mix_adjacency = false;
  // Where Calinski-Harabasz is measured when choosing k: the clustered input
  // points, or each candidate's own spectral embedding.
  enum class ScoreSpace { kInput, kEmbedding } score_space = ScoreSpace::kInput;

  void validate() const;
};

/// "input" or "embedding"; throws ConfigError otherwise.
ClusterConfig::ScoreSpace parse_score_space(const std::string& name);

/// exp(-gamma * ||x_i - x_j||^2).
Matrix rbf_affinity(const Matrix& x, double gamma);

/// Eigen-decomposition of the symmetric normalized Laplacian
/// I - D^-1/2 W D^-1/2 of an affinity matrix, reusable across k.
struct LaplacianSpectrum {
  std::vector<double> values;  // ascending
  Matrix vectors;              // columns
};
LaplacianSpectrum laplacian_spectrum(const Matrix& affinity);

/// Rows are the k smallest-eigenvalue eigenvectors, each row scaled to
/// unit length.
Matrix spectral_embed(const LaplacianSpectrum& spectrum, std::size_t k);
Matrix spectral_embed(const Matrix& affinity, std::size_t k);

struct KMeansResult {
  std::vector<int> labels;  // contiguous ids in order of first appearance
  double wcss = 0.0;
  std::vector<double> objective_trace;  // WCSS after each Lloyd step, best restart
};

/// Lloyd's algorithm with farthest-first seeding; best of cfg.kmeans_restarts.
KMeansResult kmeans(const Matrix& points, std::size_t k, const ClusterConfig& cfg);

/// Between/within dispersion ratio. Returns +infinity when the within-cluster
/// sum of squares is zero.
double calinski_harabasz(const Matrix& points, const std::vector<int>& labels);

struct KScore {
  std::size_t k = 0;
  double score = 0.0;
};

struct PseudoLabelResult {
  Labels labels;
  std::size_t chosen_k = 0;
  std::vector<KScore> scores;
};

/// Spectral clustering of feature rows for every candidate k, keeping the
/// labeling with the highest Calinski-Harabasz score (see ScoreSpace).
/// Ties keep the smaller k.
PseudoLabelResult cluster_points(const Matrix& points, const ClusterConfig& cfg,
                                 const Matrix* adjacency = nullptr);
PseudoLabelResult pseudo_labels(const GraphBundle& g, const ClusterConfig& cfg);

}  // namespace bbga
