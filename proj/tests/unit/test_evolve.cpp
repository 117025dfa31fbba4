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

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "fqu/coordinates.hpp"
#include "fqu/error.hpp"
#include "fqu/evolve.hpp"
#include "fqu/propagator.hpp"

using namespace fqu;

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

struct Setup {
  int m = 1;
  int n = 1;
  std::vector<std::vector<std::string>> lambda;  // [k][l]
  std::vector<std::string> drift;
  std::vector<std::string> path{"t"};
  double t0 = 0.0;
  double t1 = 1.0;
  bool closed = false;
  std::vector<std::pair<MultiIndex, std::string>> hamiltonian;
  int N = 32;
  double L = 5.0;
  OrderingRule ordering = OrderingRule::Symmetric;

  DrivenHamiltonian build() const {
    const auto slots = coefficient_variables(m, n);
    BundleModel b = BundleModel::flat(m, n);
    for (std::size_t k = 0; k < lambda.size(); ++k) {
      for (std::size_t l = 0; l < lambda[k].size(); ++l) b.sigma_connection[k][l] = parse_expr(lambda[k][l], slots);
    }
    for (std::size_t k = 0; k < drift.size(); ++k) b.time_drift[k] = parse_expr(drift[k], slots);
    std::vector<Expr> chi;
    for (const auto& c : path) chi.push_back(parse_expr(c, parameter_variables(0)));
    PolynomialObservable h(m, n);
    for (const auto& [index, coeff] : hamiltonian) h.add_term(index, parse_expr(coeff, slots));
    return DrivenHamiltonian(b, ParameterPath::closed_form(chi, t0, t1, closed), h,
                             BumpCover::single_chart(n, -L, L), FiberGrid(n, N, L), ordering);
  }
};

Setup driven_oscillator(int N, double L, const std::string& chi) {
  Setup s;
  s.lambda = {{"1"}};
  s.path = {chi};
  s.hamiltonian = {{{0, 0}, "0.5"}, {{}, "0.5*(q1 - s1)^2"}};
  s.N = N;
  s.L = L;
  return s;
}

Setup curvature_loop(int N, double L, double t1, bool closed) {
  Setup s;
  s.m = 2;
  s.lambda = {{"1", "q1"}};
  s.path = {"cos(t)", "sin(t)"};
  s.t1 = t1;
  s.closed = closed;
  s.N = N;
  s.L = L;
  return s;
}

double identity_defect(const DenseMatrix& U) { return (U - DenseMatrix::Identity(U.rows(), U.cols())).norm(); }

WaveSection gaussian(const FiberGrid& grid, double center, double kick = 0.0) {
  const std::vector<double> c{center};
  const std::vector<double> k{kick};
  return WaveSection::gaussian(grid, c, 1.0, k);
}

}  // namespace

TEST_SUITE("evolve") {
  TEST_CASE("geometric generator") {
    Setup still = driven_oscillator(32, 5.0, "0.7");
    CHECK(still.build().geometric_generator(0.4).frobenius_norm() == 0.0);

    Setup line = driven_oscillator(32, 5.0, "t");
    const auto dh = line.build();
    const DenseMatrix D = derivative_matrix(dh.grid(), 0).dense();
    CHECK((dh.geometric_generator(0.3).dense() - (-kI) * D).cwiseAbs().maxCoeff() == 0.0);

    const auto loop = curvature_loop(64, 4.0, 2.0 * kPi, true).build();
    const double t = kPi / 4.0;
    const DenseMatrix Q = position_operator(loop.grid(), 0).dense();
    const DenseMatrix D64 = derivative_matrix(loop.grid(), 0).dense();
    const DenseMatrix expected = (-0.5 * kI) * ((-std::sin(t)) * (D64 + D64) + std::cos(t) * (Q * D64 + D64 * Q));
    CHECK((loop.geometric_generator(t).dense() - expected).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(hermiticity_defect(loop.geometric_generator(t)) <= 1e-14);
  }

  TEST_CASE("dynamic operator") {
    Setup free;
    free.hamiltonian = {{{0, 0}, "0.5"}};
    const auto dh = free.build();
    const DenseMatrix D = derivative_matrix(dh.grid(), 0).dense();
    for (double t : {0.0, 0.5, 1.0}) CHECK((dh.dynamic_operator(t).dense() + 0.5 * D * D).cwiseAbs().maxCoeff() <= 1e-12);

    Setup drift;
    drift.drift = {"1"};
    CHECK((drift.build().dynamic_operator(0.2).dense() - (-kI) * D).cwiseAbs().maxCoeff() == 0.0);

    Setup osc = driven_oscillator(512, 10.0, "sin(t)");
    osc.t1 = 3.0;
    const auto dho = osc.build();
    for (double t : {0.0, 1.3, 2.9}) {
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(dho.dynamic_operator(t).dense(), Eigen::EigenvaluesOnly);
      CHECK(std::abs(es.eigenvalues()[0] - 0.5) <= 1e-3);
    }
  }

  TEST_CASE("construction errors") {
    Setup bad = driven_oscillator(32, 5.0, "t");
    bad.path = {"t", "t"};
    CHECK_THROWS_AS(bad.build(), ModelError);
    const auto dh = driven_oscillator(32, 5.0, "t").build();
    CHECK_THROWS_AS(dh.with_grid(FiberGrid(2, 16, 5.0)), ModelError);
    EvolutionOptions options;
    options.steps = 0;
    CHECK_THROWS_AS(evolve_time_ordered(dh, options), ModelError);
    options.steps = 4;
    options.initial = gaussian(FiberGrid(1, 64, 5.0), 0.0);
    CHECK_THROWS_AS(evolve_time_ordered(dh, options), ModelError);
  }

  TEST_CASE("vanishing Hamiltonian gives the identity") {
    Setup zero;
    zero.N = 16;
    EvolutionOptions options;
    options.steps = 7;
    const auto result = evolve_time_ordered(zero.build(), options);
    CHECK(*result.unitary == DenseMatrix::Identity(16, 16));
  }

  TEST_CASE("static oscillator eigenphases") {
    Setup osc;
    osc.hamiltonian = {{{0, 0}, "0.5"}, {{}, "0.5*q1^2"}};
    osc.t1 = 2.0 * kPi;
    osc.N = 32;
    const auto dh = osc.build();
    EvolutionOptions options;
    options.steps = 64;
    const DenseMatrix U = *evolve_time_ordered(dh, options).unitary;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(dh.hamiltonian(0.0).dense());
    const Eigen::VectorXcd phases = (-kI * osc.t1 * es.eigenvalues().cast<Complex>()).array().exp();
    const DenseMatrix expected = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    CHECK((U - expected).norm() <= 1e-10);
  }

  TEST_CASE("oscillator ground state acquires phase -pi") {
    Setup osc;
    osc.hamiltonian = {{{0, 0}, "0.5"}, {{}, "0.5*q1^2"}};
    osc.t1 = 2.0 * kPi;
    osc.N = 512;
    osc.L = 8.0;
    const auto dh = osc.build();
    EvolutionOptions options;
    options.steps = 4096;
    options.compute_unitary = false;
    options.initial = gaussian(dh.grid(), 0.0);
    const auto result = evolve_time_ordered(dh, options);
    CHECK(std::abs(result.phase_total_unwrapped + kPi) <= 1e-3);
    CHECK(std::abs(std::abs(result.phase_total) - kPi) <= 1e-3);
    CHECK(result.unitarity_defect <= 1e-10);
  }

  TEST_CASE("time ordering converges at second order") {
    const auto dh = driven_oscillator(32, 5.0, "0.5*sin(2*t)").build();
    EvolutionOptions options;
    std::vector<DenseMatrix> U;
    for (int steps : {50, 100, 200}) {
      options.steps = steps;
      U.push_back(*evolve_time_ordered(dh, options).unitary);
    }
    const double ratio = (U[0] - U[1]).norm() / (U[1] - U[2]).norm();
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }

  TEST_CASE("unitarity and trajectory") {
    Setup s = driven_oscillator(48, 5.0, "0.5*sin(2*t)");
    s.t1 = 2.0;
    const auto dh = s.build();
    EvolutionOptions options;
    options.steps = 200;
    options.emit_trajectory = true;
    options.sample_every = 50;
    options.initial = gaussian(dh.grid(), 0.3, 0.2);
    const auto result = evolve_time_ordered(dh, options);
    CHECK(result.unitarity_defect <= 1e-10);
    CHECK(result.max_hermiticity_defect <= 1e-12);
    REQUIRE(result.trajectory.size() == 5);
    CHECK(result.trajectory.back().t == doctest::Approx(2.0));
    for (const auto& row : result.trajectory) {
      CHECK(row.unitarity_defect <= 1e-10);
      CHECK(std::abs(row.norm - 1.0) <= 1e-9);
      CHECK(std::abs(row.phase_total - wrap_phase(row.phase_total_unwrapped)) <= 1e-12);
    }
  }

  TEST_CASE("state-only propagation matches the unitary") {
    const auto dh = driven_oscillator(48, 5.0, "sin(t)").build();
    EvolutionOptions options;
    options.steps = 100;
    options.initial = gaussian(dh.grid(), 0.2);
    const auto with_u = evolve_time_ordered(dh, options);
    options.compute_unitary = false;
    const auto state_only = evolve_time_ordered(dh, options);
    CHECK((with_u.final_state->amplitudes - state_only.final_state->amplitudes).norm() <= 1e-10);
    CHECK(std::abs(with_u.phase_geometric - state_only.phase_geometric) <= 1e-12);
  }

  TEST_CASE("flat loop has trivial holonomy") {
    Setup flat = curvature_loop(64, 4.0, 2.0 * kPi, true);
    flat.lambda = {{"1", "-0.5"}};
    CHECK(identity_defect(geometric_factor(flat.build(), 2.0 * kPi, 512)) <= 1e-8);
  }

  TEST_CASE("straight transport shifts sections") {
    Setup line = driven_oscillator(512, 10.0, "t");
    line.t1 = 1.5;
    const auto dh = line.build();
    const WaveSection moved = geometric_transport(dh, gaussian(dh.grid(), -0.5), 1.5, 64);
    const WaveSection expected = gaussian(dh.grid(), 1.0);
    CHECK((moved.amplitudes - expected.amplitudes).cwiseAbs().maxCoeff() <= 1e-3);
  }

  TEST_CASE("curvature loop holonomy converges") {
    const auto dh = curvature_loop(32, 4.0, 2.0 * kPi, true).build();
    const auto report = geometric_convergence(dh, 256);
    CHECK(report.ratio >= 3.5);
    CHECK(report.richardson_stability <= 1e-6);
    CHECK(report.holonomy_norm > 1e-2);
    CHECK(identity_defect(report.richardson.adjoint() * report.richardson) <= 1e-6);
  }

  TEST_CASE("geometric factor depends only on the image curve") {
    const auto dh = curvature_loop(32, 4.0, kPi, false).build();
    const Expr warp = parse_expr("t^2/pi", parameter_variables(0));
    const auto warped = dh.with_path(reparametrize_path(dh.path(), warp));
    for (double t : {0.0, 0.7, 2.2, kPi}) {
      const auto a = warped.path().position(t);
      const auto b = dh.path().position(t * t / kPi);
      CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-14));
      CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-14));
    }
    const double diff = (geometric_factor(dh, kPi, 8192) - geometric_factor(warped, kPi, 8192)).norm();
    CHECK(diff <= 5e-6);

    const auto same = reparametrize_path(dh.path(), parse_expr("t", parameter_variables(0)));
    CHECK(same.position(1.1) == dh.path().position(1.1));
  }

  TEST_CASE("loop composition") {
    const auto full = curvature_loop(32, 4.0, 2.0 * kPi, true).build();
    Setup first = curvature_loop(32, 4.0, kPi, false);
    Setup second = curvature_loop(32, 4.0, 2.0 * kPi, false);
    second.t0 = kPi;
    const DenseMatrix A = geometric_factor(first.build(), kPi, 256);
    const DenseMatrix B = geometric_factor(second.build(), 2.0 * kPi, 256);
    CHECK((geometric_factor(full, 2.0 * kPi, 512) - B * A).norm() <= 1e-10);
  }

  TEST_CASE("split evolution") {
    Setup transport = driven_oscillator(32, 5.0, "sin(t)");
    transport.hamiltonian.clear();
    const auto geo_only = split_evolution(transport.build(), 1.0, 200);
    CHECK(geo_only.asserted);
    CHECK((geo_only.full - geo_only.geometric).norm() <= 1e-12);

    Setup commuting = driven_oscillator(32, 5.0, "t");
    commuting.hamiltonian = {{{0, 0}, "1"}};
    const auto c = split_evolution(commuting.build(), 1.0, 100);
    CHECK(c.commutator_report <= 1e-10);
    CHECK(c.asserted);
    CHECK(c.factorization_defect <= 1e-8);

    const auto d = split_evolution(driven_oscillator(32, 5.0, "sin(t)").build(), 1.0, 100);
    CHECK(d.commutator_report > 1e-3);
    CHECK_FALSE(d.asserted);
    CHECK(d.factorization_defect > 1e-3);
  }

  TEST_CASE("Heisenberg derivative") {
    Setup osc;
    osc.hamiltonian = {{{0, 0}, "0.5"}, {{}, "0.5*q1^2"}};
    osc.N = 512;
    osc.L = 8.0;
    const auto dh = osc.build();
    const LinearOperator H = dh.hamiltonian(0.0);
    CHECK(heisenberg_derivative(H, dh, 0.0).frobenius_norm() == 0.0);

    const WaveSection psi = gaussian(dh.grid(), 0.4, 0.2);
    const StateVector lhs = heisenberg_derivative(position_operator(dh.grid(), 0), dh, 0.0).apply(psi.amplitudes);
    const StateVector rhs = ((-kI) * derivative_matrix(dh.grid(), 0)).apply(psi.amplitudes);
    CHECK(std::sqrt(dh.grid().cell_volume()) * (lhs - rhs).norm() <= 1e-3);
  }

  TEST_CASE("Heisenberg derivative tracks propagated expectations") {
    Setup s = driven_oscillator(512, 10.0, "0.5*sin(t)");
    s.t1 = 2.0;
    const auto dh = s.build();
    const auto f = PolynomialObservable::coordinate(1, 1, 0) -
                   PolynomialObservable::constant(1, 1, parse_expr("s1", coefficient_variables(1, 1)));
    const double t = 1.0;
    const double delta = 1e-3;
    const auto value_at = [&](double when, WaveSection* state) {
      EvolutionOptions options;
      options.steps = static_cast<int>(std::lround(when / 1e-3));
      options.t_end = when;
      options.compute_unitary = false;
      options.initial = gaussian(dh.grid(), 0.3, 0.1);
      const WaveSection end = *evolve_time_ordered(dh, options).final_state;
      if (state != nullptr) *state = end;
      return expectation(quantize_polynomial(f, dh.cover(), dh.grid(), when, dh.path().position(when)), end);
    };
    WaveSection mid = gaussian(dh.grid(), 0.0);
    value_at(t, &mid);
    const double rate = (value_at(t + delta, nullptr) - value_at(t - delta, nullptr)) / (2.0 * delta);
    const auto parts = heisenberg_derivative(f, dh, t);
    const double predicted = expectation(parts.commutator_part, mid) + expectation(parts.explicit_part, mid);
    CHECK(std::abs(rate - predicted) <= 1e-3);
    CHECK(expectation(parts.explicit_part, mid) == doctest::Approx(-0.5 * std::cos(t)).epsilon(1e-12));
  }

  TEST_CASE("classical free particle") {
    Setup free;
    free.hamiltonian = {{{0, 0}, "0.5"}};
    free.t1 = 3.0;
    const auto traj = classical_hamilton_flow(free.build(), ClassicalState{{0.25}, {1.0}, 0.0}, 3.0, 30);
    REQUIRE(traj.size() == 31);
    for (const auto& s : traj) {
      CHECK(std::abs(s.q[0] - (0.25 + s.t)) <= 1e-10);
      CHECK(std::abs(s.p[0] - 1.0) <= 1e-10);
    }
  }

  TEST_CASE("classical oscillator conserves energy") {
    Setup osc;
    osc.hamiltonian = {{{0, 0}, "0.5"}, {{}, "0.5*q1^2"}};
    osc.t1 = 10.0;
    const auto traj = classical_hamilton_flow(osc.build(), ClassicalState{{1.0}, {0.5}, 0.0}, 10.0, 10000);
    const double r0 = std::hypot(1.0, 0.5);
    double worst = 0.0;
    for (const auto& s : traj) worst = std::max(worst, std::abs(std::hypot(s.q[0], s.p[0]) - r0));
    CHECK(worst <= 1e-8);
  }

  TEST_CASE("classical driven oscillator has a closed form") {
    Setup s = driven_oscillator(32, 5.0, "sin(t)");
    s.t1 = 10.0;
    const double q0 = 0.3;
    const double p0 = -0.2;
    const auto traj = classical_hamilton_flow(s.build(), ClassicalState{{q0}, {p0}, 0.0}, 10.0, 10000);
    double worst = 0.0;
    for (const auto& st : traj) {
      const double q = q0 * std::cos(st.t) + (1.0 + p0) * std::sin(st.t);
      const double p = -q0 * std::sin(st.t) + p0 * std::cos(st.t);
      worst = std::max({worst, std::abs(st.q[0] - q), std::abs(st.p[0] - p)});
    }
    CHECK(worst <= 1e-6);
  }

  TEST_CASE("classical blow-up is reported") {
    Setup s;
    s.hamiltonian = {{{0, 0}, "0.5"}, {{}, "-q1^4"}};
    s.t1 = 5.0;
    CHECK_THROWS_AS(classical_hamilton_flow(s.build(), ClassicalState{{1.0}, {0.0}, 0.0}, 5.0, 5000), NumericalError);
  }

  TEST_CASE("phase wrapping") {
    CHECK(wrap_phase(0.5) == 0.5);
    CHECK(wrap_phase(kPi) == doctest::Approx(kPi));
    CHECK(wrap_phase(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_phase(3.0 * kPi + 0.1) == doctest::Approx(-kPi + 0.1));
  }
}
