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

#include <vector>

#include "bbga/matrix.hpp"

namespace bbga {

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending;
/// column j of `vectors` belongs to values[j].
struct SymEigen {
  std::vector<double> values;
  Matrix vectors;
};

/// Householder tridiagonalization followed by implicit-shift QL.
/// Only the lower triangle of `a` is read. O(n^3).
SymEigen sym_eigen(const Matrix& a);

}  // namespace bbga
