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

// Scenario files: JSON descriptions of a driven system and the outputs to compute.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "fqu/algebra.hpp"
#include "fqu/bundle.hpp"
#include "fqu/error.hpp"
#include "fqu/evolve.hpp"
#include "fqu/quantize.hpp"

namespace fqu::cli {

/// Schema or expression error located by a JSON pointer.
class ScenarioError : public ModelError {
 public:
  ScenarioError(const std::string& pointer, const std::string& message)
      : ModelError(pointer + ": " + message), pointer_(pointer) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

struct GridSpec {
  int N = 0;
  double L = 0.0;
};

struct InitialSpec {
  std::vector<double> center;
  double width = 1.0;
  std::vector<double> kick;
};

/// Coarse grid on which the dense unitary is built when the main grid is too large.
struct UnitaryGridSpec {
  int N = 0;
  int steps = 0;
};

struct Tolerances {
  double unitarity = 1e-10;
  double holonomy = 1e-7;
  double ehrenfest = 1e-3;
  double richardson = 1e-6;
  double convergence_ratio = 3.5;
  double nontrivial_holonomy = 1e-2;
  double reparametrization = 5e-6;
  double factorization = 1e-8;
  double decomposition = 1e-12;
};

/// Output names accepted in "outputs".
const std::set<std::string>& known_outputs();

struct ScenarioConfig {
  std::string name;
  int m = 1;
  int n = 1;
  std::map<std::string, double, std::less<>> constants;
  BundleModel bundle;
  std::optional<ParameterPath> path;
  PolynomialObservable hamiltonian{1, 1};
  int cover_charts = 1;
  double cover_overlap = 1.0;
  GridSpec grid;
  int steps = 1000;
  int segments = 1024;
  int sample_every = 1;
  OrderingRule ordering = OrderingRule::Symmetric;
  std::optional<UnitaryGridSpec> unitary_grid;
  std::optional<InitialSpec> initial;
  std::vector<Expr> warps;
  Tolerances tolerances;
  std::set<std::string> outputs;
  /// The document the config was read from.
  nlohmann::json source;

  bool wants(const std::string& output) const { return outputs.count(output) != 0; }
  BumpCover cover() const;
  FiberGrid fiber_grid() const;
  DrivenHamiltonian build() const;
  /// Same system on another grid.
  DrivenHamiltonian build(const FiberGrid& grid) const;
  WaveSection initial_state(const FiberGrid& grid) const;
};

/// Validates a scenario document. Throws ScenarioError.
ScenarioConfig parse_scenario(const nlohmann::json& document);
/// Reads and validates a scenario file. Throws ScenarioError.
ScenarioConfig load_scenario(const std::filesystem::path& file);

std::string ordering_name(OrderingRule rule);

}  // namespace fqu::cli
