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

#include <filesystem>

#include "bbga/graph.hpp"

namespace bbga {

/// Reads a bundle directory: meta.json, edges.csv, features.csv and the
/// optional labels.csv / splits.json. Throws DataError on any violation.
GraphBundle load_bundle(const std::filesystem::path& dir);

/// Writes the same layout; labels.csv and splits.json only when present.
void save_bundle(const GraphBundle& g, const std::filesystem::path& dir);

}  // namespace bbga
