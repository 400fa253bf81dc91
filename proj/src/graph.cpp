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

#include "bbga/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "bbga/error.hpp"
#include "bbga/kernels.hpp"
#include "bbga/rng.hpp"

namespace bbga {

std::size_t GraphBundle::n_edges() const { return count_edges(adjacency); }

const NodeSet& GraphBundle::split(const std::string& name) const {
  auto it = splits.find(name);
  if (it == splits.end()) throw DataError("graph bundle has no '" + name + "' split");
  return it->second;
}

void GraphBundle::validate() const {
  const std::size_t n = n_nodes;
  if (adjacency.rows() != n || adjacency.cols() != n)
    throw DataError("adjacency must be " + std::to_string(n) + "x" + std::to_string(n));
  if (features.rows() != n) throw DataError("features must have one row per node");
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) throw DataError("adjacency diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = adjacency(i, j);
      if (v != 0.0 && v != 1.0) throw DataError("adjacency entries must be 0 or 1");
      if (v != adjacency(j, i)) throw DataError("adjacency must be symmetric");
    }
  }
  for (double v : features.values())
    if (v != 0.0 && v != 1.0) throw DataError("features must be binary");
  if (labels) {
    if (labels->size() != n) throw DataError("labels must have one entry per node");
    for (int c : *labels) {
      if (c < 0) throw DataError("labels must be non-negative");
      if (n_classes && c >= *n_classes)
        throw DataError("label " + std::to_string(c) + " exceeds n_classes");
    }
  }
  std::vector<char> seen(n, 0);
  for (const auto& [name, nodes] : splits) {
    for (std::size_t v : nodes) {
      if (v >= n) throw DataError("split '" + name + "' has out-of-range node");
      if (seen[v]) throw DataError("splits are not disjoint (node " + std::to_string(v) + ")");
      seen[v] = 1;
    }
  }
}

void SplitConfig::validate() const {
  if (!(train_fraction > 0.0) || !(val_fraction > 0.0))
    throw ConfigError("split fractions must be positive");
  if (!(train_fraction + val_fraction < 1.0))
    throw ConfigError("train_fraction + val_fraction must be < 1");
}

void SbmConfig::validate() const {
  if (block_sizes.empty()) throw ConfigError("sbm: block_sizes must be nonempty");
  for (std::size_t b : block_sizes)
    if (b == 0) throw ConfigError("sbm: block sizes must be positive");
  if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0))
    throw ConfigError("sbm: need 0 <= p_out < p_in <= 1");
  if (!(feature_flip_prob >= 0.0 && feature_flip_prob <= 1.0))
    throw ConfigError("sbm: feature_flip_prob must be in [0, 1]");
  if (feature_dim < block_sizes.size())
    throw ConfigError("sbm: feature_dim must be at least the number of blocks");
}

std::vector<Edge> edge_list(const Matrix& adjacency) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < adjacency.rows(); ++i)
    for (std::size_t j = i + 1; j < adjacency.cols(); ++j)
      if (adjacency(i, j) != 0.0) edges.emplace_back(i, j);
  return edges;
}

std::size_t count_edges(const Matrix& adjacency) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < adjacency.rows(); ++i)
    for (std::size_t j = i + 1; j < adjacency.cols(); ++j)
      if (adjacency(i, j) != 0.0) ++count;
  return count;
}

Matrix adjacency_from_edges(std::size_t n, std::span<const Edge> edges) {
  Matrix a(n, n);
  for (auto [u, v] : edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

std::vector<std::size_t> connected_components(const Matrix& adjacency) {
  const std::size_t n = adjacency.rows();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(n, kUnset);
  std::size_t next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] != kUnset) continue;
    std::queue<std::size_t> frontier;
    frontier.push(s);
    comp[s] = next;
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      auto row = adjacency.row(u);
      for (std::size_t v = 0; v < n; ++v) {
        if (row[v] != 0.0 && comp[v] == kUnset) {
          comp[v] = next;
          frontier.push(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

namespace {

GraphBundle induced_subgraph(const GraphBundle& g, const NodeSet& keep) {
  constexpr std::size_t kDropped = static_cast<std::size_t>(-1);
  std::vector<std::size_t> new_id(g.n_nodes, kDropped);
  for (std::size_t i = 0; i < keep.size(); ++i) new_id[keep[i]] = i;

  GraphBundle out;
  out.n_nodes = keep.size();
  out.n_classes = g.n_classes;
  out.adjacency = Matrix(keep.size(), keep.size());
  out.features = Matrix(keep.size(), g.features.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = 0; j < keep.size(); ++j)
      out.adjacency(i, j) = g.adjacency(keep[i], keep[j]);
    auto src = g.features.row(keep[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
  }
  if (g.labels) {
    Labels labels(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) labels[i] = (*g.labels)[keep[i]];
    out.labels = std::move(labels);
  }
  for (const auto& [name, nodes] : g.splits) {
    NodeSet mapped;
    for (std::size_t v : nodes)
      if (new_id[v] != kDropped) mapped.push_back(new_id[v]);
    std::sort(mapped.begin(), mapped.end());
    out.splits[name] = std::move(mapped);
  }
  return out;
}

}  // namespace

GraphBundle largest_connected_component(const GraphBundle& g) {
  if (g.n_nodes <= 1) return g;
  const auto comp = connected_components(g.adjacency);
  const std::size_t n_comp = *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<std::size_t> sizes(n_comp, 0);
  for (std::size_t c : comp) ++sizes[c];
  // Component ids follow the smallest member id, so the first maximum wins ties.
  const std::size_t best =
      static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  NodeSet keep;
  for (std::size_t v = 0; v < g.n_nodes; ++v)
    if (comp[v] == best) keep.push_back(v);
  return induced_subgraph(g, keep);
}

std::map<std::string, NodeSet> make_random_splits(std::size_t n, const SplitConfig& cfg) {
  cfg.validate();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  std::shuffle(order.begin(), order.end(), rng);
  // The epsilon keeps e.g. 100 * 0.1 from flooring to 9 on representation error.
  const auto n_train = static_cast<std::size_t>(std::floor(n * cfg.train_fraction + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(n * cfg.val_fraction + 1e-9));
  std::map<std::string, NodeSet> splits;
  NodeSet train(order.begin(), order.begin() + n_train);
  NodeSet val(order.begin() + n_train, order.begin() + n_train + n_val);
  NodeSet test(order.begin() + n_train + n_val, order.end());
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  std::sort(test.begin(), test.end());
  splits["train"] = std::move(train);
  splits["val"] = std::move(val);
  splits["test"] = std::move(test);
  return splits;
}

GraphBundle random_split(const GraphBundle& g, const SplitConfig& cfg) {
  GraphBundle out = g;
  out.splits = make_random_splits(g.n_nodes, cfg);
  return out;
}

double jaccard_similarity(std::span<const double> x1, std::span<const double> x2) {
  if (x1.size() != x2.size()) throw ShapeError("jaccard_similarity: dimension mismatch");
  std::size_t both = 0;
  std::size_t either = 0;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const bool a = x1[i] != 0.0;
    const bool b = x2[i] != 0.0;
    both += (a && b) ? 1 : 0;
    either += (a || b) ? 1 : 0;
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
}

Matrix jaccard_matrix(const Matrix& features) {
  const std::size_t n = features.rows();
  // Binary rows: M11 is the inner product, the union is |x| + |y| - M11.
  Matrix shared = matmul_nt(features, features);
  std::vector<double> counts(n);
  for (std::size_t i = 0; i < n; ++i) counts[i] = shared(i, i);
  Matrix j(n, n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      const double m11 = std::round(shared(u, v));
      const double uni = counts[u] + counts[v] - m11;
      j(u, v) = uni <= 0.0 ? 0.0 : m11 / uni;
    }
  }
  return j;
}

Matrix normalize_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("normalize_adjacency: matrix must be square");
  const std::size_t n = a.rows();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 1.0;
    for (double v : a.row(i)) {
      if (v < 0.0) throw NumericError("normalize_adjacency: negative entry");
      d += v;
    }
    if (!(d > 0.0)) throw NumericError("normalize_adjacency: zero row sum");
    inv_sqrt[i] = 1.0 / std::sqrt(d);
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = (a(i, j) + (i == j ? 1.0 : 0.0)) * inv_sqrt[i] * inv_sqrt[j];
  return out;
}

GraphBundle generate_sbm(const SbmConfig& cfg) {
  cfg.validate();
  const std::size_t n =
      std::accumulate(cfg.block_sizes.begin(), cfg.block_sizes.end(), std::size_t{0});
  const std::size_t blocks = cfg.block_sizes.size();
  Labels block(n);
  {
    std::size_t v = 0;
    for (std::size_t b = 0; b < blocks; ++b)
      for (std::size_t i = 0; i < cfg.block_sizes[b]; ++i) block[v++] = static_cast<int>(b);
  }

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GraphBundle g;
  g.n_nodes = n;
  g.adjacency = Matrix(n, n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = block[u] == block[v] ? cfg.p_in : cfg.p_out;
      if (unit(rng) < p) {
        g.adjacency(u, v) = 1.0;
        g.adjacency(v, u) = 1.0;
      }
    }
  }

  const std::size_t width = cfg.feature_dim / blocks;
  g.features = Matrix(n, cfg.feature_dim);
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t lo = static_cast<std::size_t>(block[u]) * width;
    for (std::size_t f = 0; f < cfg.feature_dim; ++f) {
      bool bit = f >= lo && f < lo + width;
      if (unit(rng) < cfg.feature_flip_prob) bit = !bit;
      g.features(u, f) = bit ? 1.0 : 0.0;
    }
  }
  g.labels = std::move(block);
  g.n_classes = static_cast<int>(blocks);
  return g;
}

std::vector<char> membership(std::size_t n, const NodeSet& set) {
  std::vector<char> in(n, 0);
  for (std::size_t v : set) in.at(v) = 1;
  return in;
}

}  // namespace bbga
