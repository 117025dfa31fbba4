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

// Runs the acceptance criteria and prints one [PASS]/[FAIL] line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fqu/cli/presets.hpp"
#include "fqu/cli/run.hpp"
#include "fqu/cli/verify.hpp"

using namespace fqu;
using namespace fqu::cli;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string describe(const Check& c) { return c.name + " " + sci(c.value) + " " + c.relation + " " + sci(c.limit); }

Outcome from_checks(const std::vector<Check>& checks) {
  Outcome o{true, ""};
  for (const auto& c : checks) {
    o.passed = o.passed && c.passed;
    o.detail += (o.detail.empty() ? "" : "; ") + describe(c);
  }
  return o;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct PresetRun {
  RunReport report;
  double seconds = 0.0;
};

}  // namespace

int main() {
  std::map<std::string, PresetRun> presets;
  for (const auto& name : preset_names()) {
    const auto start = std::chrono::steady_clock::now();
    RunReport report = run_preset(name);
    presets[name] = PresetRun{std::move(report), seconds_since(start)};
  }

  int failures = 0;
  const auto criterion = [&](int id, const std::string& title, double budget, const std::function<Outcome()>& body,
                             std::optional<double> preset_seconds = std::nullopt) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = Outcome{false, std::string("error: ") + e.what()};
    }
    const double elapsed = preset_seconds.value_or(0.0) + seconds_since(start);
    const bool in_time = elapsed <= budget;
    const bool passed = o.passed && in_time;
    if (!passed) ++failures;
    std::printf("[%s] AC%d %s: %s (%.1f s of %.0f s)\n", passed ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(),
                elapsed, budget);
    std::fflush(stdout);
  };

  criterion(1, "Dirac condition, symbol level", 5.0, [] { return from_checks({dirac_symbol_check(50, 100)}); });
  criterion(2, "Dirac condition, grid level", 30.0, [] { return from_checks({dirac_grid_check()}); });
  criterion(3, "Hermiticity", 60.0,
            [] { return from_checks({hermiticity_affine_check(100), hermiticity_polynomial_check(20)}); });
  criterion(4, "Partition-of-unity reconstruction", 10.0, [] { return from_checks(decomposition_checks(200)); });

  double preset_total = 0.0;
  for (const auto& [name, r] : presets) preset_total += r.seconds;
  criterion(
      5, "Unitarity across presets", 900.0,
      [&] {
        std::vector<Check> checks;
        for (const auto& [name, r] : presets) {
          for (const auto& c : r.report.checks) {
            if (c.name == "unitarity" || c.name == "norm_conservation") {
              checks.push_back(Check{name + "." + c.name, c.value, c.relation, c.limit, c.passed});
            }
          }
        }
        Outcome o = from_checks(checks);
        if (checks.size() < presets.size()) o = Outcome{false, "a preset built no unitary; " + o.detail};
        return o;
      },
      preset_total);

  criterion(
      6, "Reparametrization invariance", 120.0,
      [&] {
        const auto& r = presets.at("reparam_pair").report;
        return from_checks({Check::make("difference", r.reparametrization_difference.value_or(1.0), "<=", 5e-6)});
      },
      presets.at("reparam_pair").seconds);

  criterion(
      7, "Flat holonomy", 60.0,
      [&] {
        const auto& r = presets.at("flat_loop").report;
        return from_checks({Check::make("holonomy_defect", r.holonomy_defect.value_or(1.0), "<=", 1e-7)});
      },
      presets.at("flat_loop").seconds);

  criterion(
      8, "Nonabelian holonomy self-consistency", 180.0,
      [&] {
        const auto& r = presets.at("nonabelian_loop").report;
        if (!r.convergence) return Outcome{false, "no convergence row"};
        return from_checks({Check::make("ratio", r.convergence->ratio, ">=", 3.5),
                            Check::make("richardson_stability", r.convergence->richardson_stability, "<=", 1e-6),
                            Check::make("holonomy_norm", r.convergence->holonomy_norm, ">", 1e-2)});
      },
      presets.at("nonabelian_loop").seconds);

  criterion(
      9, "Ehrenfest against the classical flow", 300.0,
      [&] {
        const ScenarioConfig c = parse_scenario(preset_document("driven_oscillator"));
        const double dt = (c.path->t1() - c.path->t0()) / c.steps;
        const auto& r = presets.at("driven_oscillator").report;
        if (!r.ehrenfest) return Outcome{false, "no Ehrenfest row"};
        Outcome o = from_checks({Check::make("q_error", r.ehrenfest->max_q_error, "<=", 1e-3),
                                 Check::make("p_error", r.ehrenfest->max_p_error, "<=", 1e-3)});
        const bool setup = c.grid.N == 512 && std::abs(dt - 1e-3) < 1e-15 && c.path->t1() - c.path->t0() == 10.0;
        if (!setup) o = Outcome{false, "scenario is not N=512, dt=1e-3 over [0, 10]; " + o.detail};
        return o;
      },
      presets.at("driven_oscillator").seconds);

  criterion(10, "Factorized evolution", 120.0, [] {
    std::vector<Check> checks = commuting_split_checks();
    const ScenarioConfig c = parse_scenario(preset_document("driven_oscillator"));
    const DrivenHamiltonian coarse = c.build(FiberGrid(c.n, c.unitary_grid->N, c.grid.L));
    const SplitResult s = split_evolution(coarse, c.path->t1(), c.unitary_grid->steps);
    checks.push_back(Check::make("driven_factorization_defect", s.factorization_defect, ">", 1e-3));
    checks.push_back(Check::make("driven_asserted", s.asserted ? 1.0 : 0.0, "<=", 0.0));
    return from_checks(checks);
  });

  criterion(11, "Prequantization curvature", 1.0, [] { return from_checks(prequantization_checks()); });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
