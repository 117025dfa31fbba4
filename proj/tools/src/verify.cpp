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

#include "fqu/cli/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fqu/bundle.hpp"
#include "fqu/cli/presets.hpp"
#include "fqu/coordinates.hpp"
#include "fqu/random_fields.hpp"

namespace fqu::cli {
namespace {

constexpr Complex kI{0.0, 1.0};

double dirac_grid_defect(const PolynomialObservable& f, const PolynomialObservable& g, int N, double center,
                         double kick) {
  const FiberGrid grid(1, N, 8.0);
  const std::vector<double> sigma{0.0};
  const std::vector<double> c{center};
  const std::vector<double> k{kick};
  const WaveSection psi = WaveSection::gaussian(grid, c, 1.0, k);
  const LinearOperator defect = commutator(quantize_affine(f, grid, 0.0, sigma), quantize_affine(g, grid, 0.0, sigma)) +
                                kI * quantize_affine(poisson_bracket_v(f, g), grid, 0.0, sigma);
  const WaveSection out = defect.apply(psi);
  return std::sqrt(inner_product(out, out).real());
}

PolynomialObservable affine_1d(const std::string& a, const std::string& b) {
  const auto vars = coefficient_variables(1, 1);
  PolynomialObservable f(1, 1);
  f.add_term({0}, parse_expr(a, vars));
  f.add_term({}, parse_expr(b, vars));
  return f;
}

BumpCover cover_with(int charts, double L) {
  return charts == 1 ? BumpCover::single_chart(1, -L, L) : BumpCover::uniform(1, charts, -L, L, 1.0);
}

void append_preset(std::vector<Check>& out, const std::string& name) {
  const RunReport report = run_preset(name);
  for (const auto& c : report.checks) out.push_back(Check{name + "." + c.name, c.value, c.relation, c.limit, c.passed});
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"dirac", "hermiticity", "holonomy", "ehrenfest", "decomposition", "all"};
  return names;
}

RunReport run_preset(const std::string& name) { return run(parse_scenario(preset_document(name)), {}); }

Check dirac_symbol_check(int pairs, int points) {
  double worst = 0.0;
  for (int pair = 0; pair < pairs; ++pair) {
    const int n = 1 + pair % 2;
    RandomFields rf(2, n, 5000 + static_cast<std::uint64_t>(pair));
    const auto f = rf.affine();
    const auto g = rf.affine();
    const auto defect = commutator(symbol_of(f), symbol_of(g)) + kI * symbol_of(poisson_bracket_v(f, g));
    for (int i = 0; i < points; ++i) worst = std::max(worst, defect.max_abs(binding_of(rf.point(2.0))));
  }
  return Check::make("dirac_symbol_defect", worst, "<=", 1e-12);
}

Check dirac_grid_check() {
  const std::vector<std::pair<PolynomialObservable, PolynomialObservable>> pairs{
      {affine_1d("1 + 0.3*sin(q1)", "0.5*q1^2"), affine_1d("cos(0.5*q1)", "tanh(q1)")},
      {affine_1d("q1", "0"), affine_1d("1", "0.2*q1^2")},
      {affine_1d("exp(-0.1*q1^2)", "sin(q1)"), affine_1d("0.5 + 0.2*q1", "cos(q1)")}};
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& [f, g] : pairs) {
    for (const auto& [center, kick] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {0.5, 0.4}, {-0.7, -0.3}}) {
      worst = std::min(worst, dirac_grid_defect(f, g, 256, center, kick) / dirac_grid_defect(f, g, 512, center, kick));
    }
  }
  return Check::make("dirac_grid_reduction", worst, ">=", 3.5);
}

std::vector<Check> prequantization_checks() {
  std::vector<Check> out;
  for (int n = 1; n <= 2; ++n) {
    const PrequantizationReport r = prequant_curvature_check(n);
    out.push_back(Check::make("prequantization_n" + std::to_string(n), r.satisfied ? 0.0 : 1.0, "<=", 0.0));
  }
  return out;
}

Check hermiticity_affine_check(int count) {
  double worst = 0.0;
  const FiberGrid line(1, 128, 5.0);
  const FiberGrid plane(2, 16, 3.0);
  RandomFields rf1(1, 1, 71);
  RandomFields rf2(1, 2, 72);
  for (int i = 0; i < count; ++i) {
    const bool two = i % 5 == 4;
    RandomFields& rf = two ? rf2 : rf1;
    const double t = rf.uniform(0.0, 1.0);
    const std::vector<double> sigma{rf.uniform(-1.0, 1.0)};
    worst = std::max(worst, hermiticity_defect(quantize_affine(rf.affine(), two ? plane : line, t, sigma)));
  }
  return Check::make("hermiticity_affine", worst, "<=", 1e-12);
}

Check hermiticity_polynomial_check(int count) {
  double worst = 0.0;
  const FiberGrid grid(1, 64, 4.0);
  RandomFields rf(1, 1, 73);
  for (int i = 0; i < count; ++i) {
    const int degree = 1 + i % 3;
    const BumpCover cover = cover_with(1 + (i / 3) % 3, 4.0);
    const std::vector<double> sigma{rf.uniform(-1.0, 1.0)};
    worst = std::max(worst, hermiticity_defect(quantize_polynomial(rf.polynomial(degree), cover, grid, 0.3, sigma)));
  }
  return Check::make("hermiticity_polynomial", worst, "<=", 1e-12);
}

std::vector<Check> decomposition_checks(int samples) {
  double partition = 0.0;
  double reconstruction = 0.0;
  RandomFields rf(1, 1, 74);
  std::mt19937_64 rng(75);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int degree = 2; degree <= 4; ++degree) {
    for (int charts = 1; charts <= 3; ++charts) {
      const BumpCover cover = cover_with(charts, 4.0);
      partition = std::max(partition, cover.partition_defect(degree, samples));
      const auto f = rf.polynomial(degree);
      const AffineFactorization factors = decompose_polynomial(f, cover);
      for (const auto& q : cover.domain_samples(samples)) {
        const PhasePoint point{u(rng), {u(rng)}, q, {u(rng)}};
        reconstruction = std::max(reconstruction, std::abs(factors.evaluate(point) - f.evaluate(point)));
      }
    }
  }
  return {Check::make("partition_defect", partition, "<=", 1e-12),
          Check::make("reconstruction_defect", reconstruction, "<=", 1e-12)};
}

std::vector<Check> commuting_split_checks() {
  BundleModel bundle = BundleModel::flat(1, 1);
  bundle.sigma_connection[0][0] = Expr::constant(1.0);
  const auto path = ParameterPath::closed_form({parse_expr("t", parameter_variables(0))}, 0.0, 1.0, false);
  const auto h = PolynomialObservable::monomial(1, 1, {0, 0}, Expr::constant(1.0));
  const DrivenHamiltonian dh(bundle, path, h, BumpCover::single_chart(1, -5.0, 5.0), FiberGrid(1, 64, 5.0));
  const SplitResult s = split_evolution(dh, 1.0, 100);
  return {Check::make("commuting_report", s.commutator_report, "<=", 1e-10),
          Check::make("commuting_factorization_defect", s.factorization_defect, "<=", 1e-8)};
}

std::vector<Check> verify_suite(const std::string& name) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string valid;
    for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw ModelError("unknown suite '" + name + "'; valid suites: " + valid);
  }
  const bool all = name == "all";
  std::vector<Check> out;
  if (all || name == "dirac") {
    out.push_back(dirac_symbol_check());
    out.push_back(dirac_grid_check());
    for (auto& c : prequantization_checks()) out.push_back(c);
  }
  if (all || name == "hermiticity") {
    out.push_back(hermiticity_affine_check());
    out.push_back(hermiticity_polynomial_check());
  }
  if (all || name == "holonomy") {
    append_preset(out, "flat_loop");
    append_preset(out, "nonabelian_loop");
    append_preset(out, "reparam_pair");
    for (auto& c : commuting_split_checks()) out.push_back(c);
  }
  if (all || name == "ehrenfest") append_preset(out, "driven_oscillator");
  if (all || name == "decomposition") {
    for (auto& c : decomposition_checks()) out.push_back(c);
    append_preset(out, "quartic_decomposition");
  }
  return out;
}

}  // namespace fqu::cli
