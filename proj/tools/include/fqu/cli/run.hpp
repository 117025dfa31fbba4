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

// Batch execution of a scenario and the machine-readable report it produces.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fqu/cli/scenario.hpp"
#include "json.hpp"

namespace fqu::cli {

/// One measured quantity compared against a limit.
struct Check {
  std::string name;
  double value = 0.0;
  /// "<=", ">=" or ">".
  std::string relation = "<=";
  double limit = 0.0;
  bool passed = false;

  static Check make(std::string name, double value, std::string relation, double limit);
  friend bool operator==(const Check&, const Check&) = default;
};

struct Phases {
  double total = 0.0;
  double geometric = 0.0;
  /// total - geometric, wrapped into (-pi, pi].
  double dynamic = 0.0;
  double total_unwrapped = 0.0;
  double geometric_unwrapped = 0.0;
  friend bool operator==(const Phases&, const Phases&) = default;
};

struct ConvergenceRow {
  int base_segments = 0;
  double coarse_difference = 0.0;
  double fine_difference = 0.0;
  double ratio = 0.0;
  double richardson_stability = 0.0;
  double holonomy_norm = 0.0;
  friend bool operator==(const ConvergenceRow&, const ConvergenceRow&) = default;
};

struct SplitRow {
  double commutator_report = 0.0;
  double factorization_defect = 0.0;
  bool asserted = false;
  friend bool operator==(const SplitRow&, const SplitRow&) = default;
};

struct EhrenfestRow {
  double max_q_error = 0.0;
  double max_p_error = 0.0;
  friend bool operator==(const EhrenfestRow&, const EhrenfestRow&) = default;
};

struct DecompositionRow {
  int degree = 0;
  int charts = 0;
  double partition_defect = 0.0;
  double reconstruction_defect = 0.0;
  friend bool operator==(const DecompositionRow&, const DecompositionRow&) = default;
};

struct ExpectationRow {
  double t = 0.0;
  std::vector<double> exp_q;
  std::vector<double> exp_p;
  friend bool operator==(const ExpectationRow&, const ExpectationRow&) = default;
};

struct RunReport {
  std::string scenario;
  int steps = 0;
  std::optional<Phases> phases;
  /// Largest ||U^+U - I||_F over every unitary built in the run.
  double unitarity_defect = 0.0;
  /// Largest relative norm drift of propagated states.
  double norm_defect = 0.0;
  double hermiticity_defect = 0.0;
  std::optional<double> holonomy_defect;
  std::optional<ConvergenceRow> convergence;
  std::optional<double> reparametrization_difference;
  std::optional<SplitRow> split;
  std::optional<EhrenfestRow> ehrenfest;
  std::optional<DecompositionRow> decomposition;
  std::vector<ExpectationRow> expectations;
  std::vector<Check> checks;
  double wall_clock_seconds = 0.0;

  bool passed() const;
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& document);

struct RunOptions {
  std::optional<int> steps;
  bool dump_unitary = false;
};

/// Runs the scenario. With a non-empty `out_dir` writes report.json,
/// trajectory.csv (when a state is propagated) and unitary.bin (when requested).
/// Errors carry the pipeline stage in their message and keep their type.
RunReport run(const ScenarioConfig& config, const std::filesystem::path& out_dir, const RunOptions& options = {});

/// Header "FQU1", u32 rows, u32 cols, u32 zero, then row-major (re, im) little-endian doubles.
void write_matrix_dump(const std::filesystem::path& file, const DenseMatrix& matrix);
DenseMatrix read_matrix_dump(const std::filesystem::path& file);

}  // namespace fqu::cli
