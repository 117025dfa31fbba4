// Copyright 2026 The fqu Authors
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

// Property suites over the library and the shipped presets.

#pragma once

#include <string>
#include <vector>

#include "fqu/cli/run.hpp"

namespace fqu::cli {

/// dirac, hermiticity, holonomy, ehrenfest, decomposition, all.
const std::vector<std::string>& suite_names();

/// Throws ModelError listing the valid suites for an unknown name.
std::vector<Check> verify_suite(const std::string& name);

/// Symbol-level [f^, g^] + i {f, g}^ over random affine pairs and points.
Check dirac_symbol_check(int pairs = 50, int points = 100);
/// Smallest reduction of the grid-level Dirac defect on Gaussians when N doubles 256 -> 512.
Check dirac_grid_check();
/// Curvature of the canonical line-bundle connection equals i times the symplectic form, n = 1 and 2.
std::vector<Check> prequantization_checks();
Check hermiticity_affine_check(int count = 100);
Check hermiticity_polynomial_check(int count = 20);
/// Partition sums and pointwise reconstruction for degrees 2..4 and 1..3 charts.
std::vector<Check> decomposition_checks(int samples = 200);
/// Constant transport generator G with H' = G^2: commutator report and factorization defect.
std::vector<Check> commuting_split_checks();

/// Runs a preset without writing files.
RunReport run_preset(const std::string& name);

}  // namespace fqu::cli
