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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bbga/matrix.hpp"

namespace bbga {

/// Sorted, duplicate-free list of node ids.
using NodeSet = std::vector<std::size_t>;
/// One class id per node.
using Labels = std::vector<int>;
using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected attributed graph with optional ground truth and named splits.
///
/// Invariants (checked by validate()):
///  - adjacency is N x N, symmetric, binary, zero diagonal;
///  - features is N x F and binary;
///  - labels, if present, have length N and lie in [0, n_classes);
///  - splits are pairwise disjoint subsets of [0, N).
struct GraphBundle {
  std::size_t n_nodes = 0;
  Matrix adjacency;
  Matrix features;
  std::optional<Labels> labels;
  std::optional<int> n_classes;
  std::map<std::string, NodeSet> splits;

  std::size_t n_features() const { return features.cols(); }
  std::size_t n_edges() const;
  /// Throws DataError naming the missing split.
  const NodeSet& split(const std::string& name) const;
  void validate() const;
};

struct SplitConfig {
  double train_fraction = 0.10;
  double val_fraction = 0.10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SbmConfig {
  std::vector<std::size_t> block_sizes;
  double p_in = 0.1;
  double p_out = 0.01;
  std::size_t feature_dim = 32;
  double feature_flip_prob = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Upper-triangle edges (u < v) in row-major order.
std::vector<Edge> edge_list(const Matrix& adjacency);
std::size_t count_edges(const Matrix& adjacency);
Matrix adjacency_from_edges(std::size_t n, std::span<const Edge> edges);

/// Connected component ids, numbered in order of each component's smallest node.
std::vector<std::size_t> connected_components(const Matrix& adjacency);

/// Induced subgraph on the largest component; ties go to the component with
/// the smallest original node id. Surviving ids keep their relative order.
GraphBundle largest_connected_component(const GraphBundle& g);

/// Seeded split into "train"/"val"/"test" with floor-sized train and val.
GraphBundle random_split(const GraphBundle& g, const SplitConfig& cfg);
std::map<std::string, NodeSet> make_random_splits(std::size_t n, const SplitConfig& cfg);

/// M11 / (M01 + M10 + M11) on binary rows; 0 when both rows are all zero.
double jaccard_similarity(std::span<const double> x1, std::span<const double> x2);
/// Pairwise Jaccard similarities of all feature rows (N x N).
Matrix jaccard_matrix(const Matrix& features);

/// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I. Accepts relaxed
/// (real, nonnegative, symmetric) adjacency.
Matrix normalize_adjacency(const Matrix& a);

/// Planted-partition graph with block-prototype binary features.
GraphBundle generate_sbm(const SbmConfig& cfg);

/// Membership mask of a node set over [0, n).
std::vector<char> membership(std::size_t n, const NodeSet& set);

}  // namespace bbga
