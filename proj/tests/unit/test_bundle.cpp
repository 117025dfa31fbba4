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

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fqu/bundle.hpp"
#include "fqu/coordinates.hpp"
#include "fqu/error.hpp"
#include "fqu/random_fields.hpp"

using namespace fqu;

namespace {

const std::vector<std::string> kTime{"t"};

Expr tparse(const std::string& s) { return parse_expr(s, kTime); }

}  // namespace

TEST_SUITE("bundle") {
  TEST_CASE("gamma of closed-form paths") {
    const auto line = ParameterPath::closed_form({tparse("t"), tparse("2*t")}, 0.0, 1.0, false);
    const GammaField g = gamma_from_path(line);
    REQUIRE(g.expressions().has_value());
    CHECK((*g.expressions())[0].is_one());
    CHECK((*g.expressions())[1].value() == 2.0);

    const auto wave = ParameterPath::closed_form({tparse("sin(t)")}, 0.0, 3.0, false);
    const GammaField gw = gamma_from_path(wave);
    CHECK(gw.evaluate(0.0, wave.position(0.0))[0] == 1.0);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int i = 0; i < 100; ++i) {
      const double t = u(rng);
      CHECK(std::abs(gw.evaluate(t, wave.position(t))[0] - std::cos(t)) <= 1e-12);
    }
  }

  TEST_CASE("gamma of a sampled circle follows the analytic velocity") {
    const int knots = 64;
    std::vector<double> ts;
    std::vector<std::vector<double>> values;
    for (int i = 0; i <= knots; ++i) {
      const double t = 2.0 * std::numbers::pi * i / knots;
      ts.push_back(t);
      values.push_back({std::cos(t), std::sin(t)});
    }
    values.back() = values.front();
    const auto circle = ParameterPath::sampled(ts, values, true);
    const GammaField g = gamma_from_path(circle);
    CHECK_FALSE(g.expressions().has_value());
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double t = 2.0 * std::numbers::pi * i / 1000;
      const auto v = g.evaluate(t, circle.position(t));
      worst = std::max({worst, std::abs(v[0] + std::sin(t)), std::abs(v[1] - std::cos(t))});
    }
    CHECK(worst <= 1e-4);
  }

  TEST_CASE("sampled paths need four knots and closed paths must close") {
    CHECK_THROWS_AS(ParameterPath::sampled({0.0, 1.0, 2.0}, {{0.0}, {1.0}, {2.0}}, false), ModelError);
    CHECK_THROWS_AS(ParameterPath::closed_form({tparse("t")}, 0.0, 1.0, true), ModelError);
    CHECK_NOTHROW(ParameterPath::closed_form({tparse("sin(t)")}, 0.0, 2.0 * std::numbers::pi, true));
  }

  TEST_CASE("composite connection") {
    BundleModel flat = BundleModel::flat(2, 1);
    const std::vector<Expr> gamma{Expr::constant(1.0), Expr::constant(2.0)};
    const auto c0 = composite_connection(gamma, flat);
    CHECK(c0.parameter_drift[1].value() == 2.0);
    CHECK(eval(c0.fiber_drift[0], {}) == 0.0);

    BundleModel one = BundleModel::flat(1, 1);
    one.sigma_connection[0][0] = Expr::constant(1.0);
    const std::vector<Expr> g1{Expr::constant(1.0)};
    CHECK(eval(composite_connection(g1, one).fiber_drift[0], {}) == 1.0);

    CHECK_THROWS_AS(composite_connection(g1, flat), ModelError);

    RandomFields rf(2, 2, 55);
    BundleModel b = BundleModel::flat(2, 2);
    for (int k = 0; k < 2; ++k) {
      b.time_drift[k] = rf.field(2);
      for (int l = 0; l < 2; ++l) b.sigma_connection[k][l] = rf.field(2);
    }
    const std::vector<Expr> g{parse_expr("cos(t) + s2", parameter_variables(2)), parse_expr("s1*t", parameter_variables(2))};
    const auto c = composite_connection(g, b);
    for (int i = 0; i < 50; ++i) {
      const VariableBinding x = binding_of(rf.point(1.0));
      for (int k = 0; k < 2; ++k) {
        double expected = eval(b.time_drift[k], x);
        for (int l = 0; l < 2; ++l) expected += eval(g[l], x) * eval(b.sigma_connection[k][l], x);
        CHECK(eval(c.fiber_drift[k], x) == doctest::Approx(expected).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("curvature of the standard connections") {
    BundleModel constant = BundleModel::flat(2, 2);
    constant.sigma_connection = {{Expr::constant(1.0), Expr::constant(-2.0)}, {Expr::constant(0.5), Expr()}};
    const auto fc = connection_curvature(constant);
    for (const auto& a : fc)
      for (const auto& b : a)
        for (const auto& e : b) CHECK(eval(e, {}) == 0.0);

    BundleModel twist = BundleModel::flat(2, 1);
    twist.sigma_connection[0][0] = Expr::constant(1.0);
    twist.sigma_connection[0][1] = Expr::variable("q1");
    const auto ft = connection_curvature(twist);
    RandomFields rf(2, 1, 2);
    for (int i = 0; i < 20; ++i) {
      const auto x = binding_of(rf.point(2.0));
      CHECK(eval(ft[0][0][1], x) == 1.0);
      CHECK(eval(ft[0][1][0], x) == -1.0);
    }
  }

  TEST_CASE("curvature is antisymmetric and vanishes for (t)-only connections") {
    RandomFields rf(3, 2, 77);
    BundleModel b = BundleModel::flat(3, 2);
    BundleModel tonly = BundleModel::flat(3, 2);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 2; ++k) {
      for (int l = 0; l < 3; ++l) {
        b.sigma_connection[k][l] = rf.field(3);
        tonly.sigma_connection[k][l] =
            parse_expr("sin(" + std::to_string(k + 1) + "*t) + " + std::to_string(l), coefficient_variables(3, 2));
      }
    }
    const auto f = connection_curvature(b);
    const auto z = connection_curvature(tonly);
    for (int i = 0; i < 100; ++i) {
      const auto x = binding_of(rf.point(1.0));
      for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 3; ++l) {
          for (int mu = 0; mu < 3; ++mu) {
            CHECK(std::abs(eval(f[k][l][mu], x) + eval(f[k][mu][l], x)) <= 1e-12);
            CHECK(std::abs(eval(z[k][l][mu], x)) <= 1e-12);
          }
        }
      }
    }
  }

  TEST_CASE("leafwise differential") {
    const PhasePoint x{0.0, {0.0}, {0.6}, {-1.5}};
    const auto dq = leafwise_differential(PolynomialObservable::coordinate(1, 1, 0));
    CHECK(dq.dq[0].evaluate(x) == 1.0);
    CHECK(dq.dp[0].evaluate(x) == 0.0);
    const auto dp = leafwise_differential(PolynomialObservable::momentum(1, 1, 0));
    CHECK(dp.dq[0].evaluate(x) == 0.0);
    CHECK(dp.dp[0].evaluate(x) == 1.0);
    const auto qp = leafwise_differential(PolynomialObservable::coordinate(1, 1, 0) * PolynomialObservable::momentum(1, 1, 0));
    CHECK(qp.dq[0].evaluate(x) == doctest::Approx(-1.5));
    CHECK(qp.dp[0].evaluate(x) == doctest::Approx(0.6));
    CHECK(qp.dq.size() + qp.dp.size() == 2);
  }

  TEST_CASE("leafwise differential is a derivation") {
    RandomFields rf(1, 2, 9);
    for (int trial = 0; trial < 10; ++trial) {
      const auto f = rf.polynomial(2);
      const auto g = rf.polynomial(1);
      const auto dfg = leafwise_differential(f * g);
      const auto df = leafwise_differential(f);
      const auto dg = leafwise_differential(g);
      for (int i = 0; i < 20; ++i) {
        const PhasePoint x = rf.point(1.0);
        for (int k = 0; k < 2; ++k) {
          const double fv = f.evaluate(x);
          const double gv = g.evaluate(x);
          CHECK(std::abs(dfg.dq[k].evaluate(x) - fv * dg.dq[k].evaluate(x) - gv * df.dq[k].evaluate(x)) <= 1e-10);
          CHECK(std::abs(dfg.dp[k].evaluate(x) - fv * dg.dp[k].evaluate(x) - gv * df.dp[k].evaluate(x)) <= 1e-10);
        }
      }
    }
  }

  TEST_CASE("prequantization curvature equals i times the symplectic form") {
    for (int n = 1; n <= 2; ++n) {
      const auto report = prequant_curvature_check(n);
      CHECK(report.satisfied);
      for (int i = 0; i < 2 * n; ++i) {
        for (int j = 0; j < 2 * n; ++j) {
          CHECK(report.curvature[i][j].is_exact_constant({0.0, report.symplectic[i][j]}));
        }
      }
      for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
          CHECK(report.curvature[n + k][j].is_exact_constant({0.0, k == j ? 1.0 : 0.0}));
        }
      }
    }
  }

  TEST_CASE("warps keep end points and image") {
    const double t1 = 2.0;
    const auto path = ParameterPath::closed_form({tparse("cos(t)"), tparse("sin(t)")}, 0.0, t1, false);
    const auto same = path.warped(tparse("t"));
    const auto warped = path.warped(tparse("t^2/2"));
    for (int i = 0; i <= 20; ++i) {
      const double t = t1 * i / 20;
      CHECK(same.position(t) == path.position(t));
    }
    CHECK(warped.position(0.0)[0] == doctest::Approx(path.position(0.0)[0]));
    CHECK(warped.position(t1)[1] == doctest::Approx(path.position(t1)[1]));
    for (int i = 0; i <= 20; ++i) {
      const auto x = warped.position(t1 * i / 20);
      CHECK(x[0] * x[0] + x[1] * x[1] == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(path.warped(tparse("2*t - t^2/2 - t^3/4 + t^2")), ModelError);
    CHECK_THROWS_AS(path.warped(tparse("t + sin(3.14159265358979*t)")), ModelError);
  }
}
