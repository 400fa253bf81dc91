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

#include "bbga/bundle_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "bbga/error.hpp"

namespace bbga {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

long long parse_int(std::string_view field, const fs::path& file, std::size_t line_no) {
  field = trim(field);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw DataError(file.filename().string() + ":" + std::to_string(line_no) +
                    ": expected integer, got '" + std::string(field) + "'");
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

json read_json(const fs::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.filename().string() + ": " + e.what());
  }
}

}  // namespace

GraphBundle load_bundle(const fs::path& dir) {
  const json meta = read_json(dir / "meta.json");
  GraphBundle g;
  std::size_t n_features = 0;
  try {
    g.n_nodes = meta.at("n_nodes").get<std::size_t>();
    n_features = meta.at("n_features").get<std::size_t>();
    if (meta.contains("n_classes") && !meta["n_classes"].is_null())
      g.n_classes = meta["n_classes"].get<int>();
  } catch (const json::exception& e) {
    throw DataError(std::string("meta.json: ") + e.what());
  }
  const std::size_t n = g.n_nodes;

  g.adjacency = Matrix(n, n);
  {
    const fs::path path = dir / "edges.csv";
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::set<Edge> seen;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      auto fields = split_commas(line);
      if (fields.size() != 2)
        throw DataError("edges.csv:" + std::to_string(line_no) + ": expected 'u,v'");
      const long long u = parse_int(fields[0], path, line_no);
      const long long v = parse_int(fields[1], path, line_no);
      if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n ||
          static_cast<std::size_t>(v) >= n)
        throw DataError("edges.csv:" + std::to_string(line_no) + ": endpoint out of range");
      if (u == v)
        throw DataError("edges.csv:" + std::to_string(line_no) + ": self-loop on node " +
                        std::to_string(u));
      const Edge key{std::min(u, v), std::max(u, v)};
      if (!seen.insert(key).second)
        throw DataError("edges.csv:" + std::to_string(line_no) + ": edge (" +
                        std::to_string(u) + "," + std::to_string(v) + ") listed twice");
      g.adjacency(u, v) = 1.0;
      g.adjacency(v, u) = 1.0;
    }
  }

  g.features = Matrix(n, n_features);
  {
    const fs::path path = dir / "features.csv";
    auto in = open_input(path);
    std::string line;
    std::size_t row = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      if (row >= n) throw DataError("features.csv: more rows than n_nodes");
      auto fields = split_commas(line);
      if (fields.size() != n_features)
        throw DataError("features.csv:" + std::to_string(line_no) + ": expected " +
                        std::to_string(n_features) + " values");
      for (std::size_t f = 0; f < n_features; ++f) {
        const long long v = parse_int(fields[f], path, line_no);
        if (v != 0 && v != 1)
          throw DataError("features.csv:" + std::to_string(line_no) +
                          ": non-binary feature value " + std::to_string(v));
        g.features(row, f) = static_cast<double>(v);
      }
      ++row;
    }
    if (row != n) throw DataError("features.csv: expected " + std::to_string(n) + " rows");
  }

  if (fs::exists(dir / "labels.csv")) {
    const fs::path path = dir / "labels.csv";
    auto in = open_input(path);
    Labels labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      labels.push_back(static_cast<int>(parse_int(line, path, line_no)));
    }
    g.labels = std::move(labels);
  }

  if (fs::exists(dir / "splits.json")) {
    const json splits = read_json(dir / "splits.json");
    try {
      for (const auto& [name, nodes] : splits.items()) {
        NodeSet set = nodes.get<NodeSet>();
        std::sort(set.begin(), set.end());
        g.splits[name] = std::move(set);
      }
    } catch (const json::exception& e) {
      throw DataError(std::string("splits.json: ") + e.what());
    }
  }

  g.validate();
  return g;
}

void save_bundle(const GraphBundle& g, const fs::path& dir) {
  fs::create_directories(dir);
  json meta{{"n_nodes", g.n_nodes}, {"n_features", g.n_features()}};
  meta["n_classes"] = g.n_classes ? json(*g.n_classes) : json(nullptr);
  std::ofstream(dir / "meta.json") << meta.dump(2) << "\n";

  {
    std::ofstream out(dir / "edges.csv");
    for (auto [u, v] : edge_list(g.adjacency)) out << u << "," << v << "\n";
  }
  {
    std::ofstream out(dir / "features.csv");
    for (std::size_t i = 0; i < g.n_nodes; ++i) {
      auto row = g.features.row(i);
      for (std::size_t f = 0; f < row.size(); ++f)
        out << (f ? "," : "") << (row[f] != 0.0 ? 1 : 0);
      out << "\n";
    }
  }
  if (g.labels) {
    std::ofstream out(dir / "labels.csv");
    for (int c : *g.labels) out << c << "\n";
  }
  if (!g.splits.empty()) {
    json splits = json::object();
    for (const auto& [name, nodes] : g.splits) splits[name] = nodes;
    std::ofstream(dir / "splits.json") << splits.dump() << "\n";
  }
  if (!fs::exists(dir / "meta.json")) throw DataError("failed writing " + dir.string());
}

}  // namespace bbga
