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

// The composite bundle Q -> Sigma -> R in global adapted coordinates
// (t, s^l, q^k): the connection on Q -> Sigma, parameter paths, and the
// coordinate-level curvature checks.

#pragma once

#include <optional>
#include <vector>

#include "fqu/algebra.hpp"
#include "fqu/expr.hpp"

namespace fqu {

/// Connection data on Q -> Sigma: dt (d_t + drift^k d_k) + ds^l (d_l + lambda^k_l d_k),
/// optionally with a parameter connection gamma^l(t, s) on Sigma -> R.
struct BundleModel {
  int m = 1;  // parameters s^l
  int n = 1;  // fiber coordinates q^k
  std::vector<std::vector<Expr>> sigma_connection;  // [k][l], fields in (t, s, q)
  std::vector<Expr> time_drift;                     // [k]
  std::optional<std::vector<Expr>> gamma;           // [l], fields in (t, s)

  /// Zero connection of the given dimensions.
  static BundleModel flat(int m, int n);

  /// Throws ModelError on inconsistent shapes or out-of-scope variables.
  void validate() const;
};

/// Cubic spline through strictly increasing knots. Periodic splines require
/// matching end values; otherwise the not-a-knot end condition is used.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> knots, std::vector<double> values, bool periodic);

  double value(double t) const;
  double derivative(double t) const;

 private:
  std::size_t segment(double t) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
};

/// A parameter function chi: [t0, t1] -> Sigma.
class ParameterPath {
 public:
  /// chi^l(t) given by closed-form fields in t.
  static ParameterPath closed_form(std::vector<Expr> components, double t0, double t1, bool closed);
  /// chi sampled at strictly increasing knots (at least 4); values[i] is the m-vector at knots[i].
  static ParameterPath sampled(std::vector<double> knots, std::vector<std::vector<double>> values,
                               bool closed);

  int dimension() const noexcept { return dim_; }
  double t0() const noexcept { return t0_; }
  double t1() const noexcept { return t1_; }
  bool closed() const noexcept { return closed_; }
  bool is_closed_form() const noexcept { return splines_.empty(); }
  /// Closed-form components (empty for sampled paths).
  const std::vector<Expr>& expressions() const noexcept { return exprs_; }

  std::vector<double> position(double t) const;
  std::vector<double> velocity(double t) const;

  /// chi o warp. For closed-form paths the components are substituted exactly.
  ParameterPath warped(const Expr& warp) const;

 private:
  ParameterPath() = default;
  void finish_closed_form();
  void check_closed() const;
  double warp_time(double t) const;

  int dim_ = 0;
  double t0_ = 0.0;
  double t1_ = 0.0;
  bool closed_ = false;
  std::vector<Expr> exprs_;
  std::vector<CompiledExpr> position_;
  std::vector<CompiledExpr> velocity_;
  std::vector<CubicSpline> splines_;
  // Warp applied on top of a sampled base path.
  std::optional<Expr> warp_expr_;
  std::optional<CompiledExpr> warp_;
  std::optional<CompiledExpr> warp_rate_;
};

/// Parameter connection gamma^l(t, s) := d_t chi^l(t), the s-independent field
/// satisfying gamma^l(t, chi(t)) = d_t chi^l(t).
class GammaField {
 public:
  explicit GammaField(ParameterPath path);

  std::vector<double> evaluate(double t, std::span<const double> sigma) const;
  /// Symbolic components, available for closed-form paths.
  const std::optional<std::vector<Expr>>& expressions() const noexcept { return exprs_; }

 private:
  ParameterPath path_;
  std::optional<std::vector<Expr>> exprs_;
};

GammaField gamma_from_path(const ParameterPath& path);

/// dt-components of the composite connection on Q -> R.
struct CompositeConnection {
  std::vector<Expr> parameter_drift;  // gamma^l
  std::vector<Expr> fiber_drift;      // drift^k + gamma^l lambda^k_l
};

CompositeConnection composite_connection(std::span<const Expr> gamma, const BundleModel& bundle);

/// F^k_{lm} = d_l L^k_m - d_m L^k_l + L^j_l d_j L^k_m - L^j_m d_j L^k_l, indexed [k][l][m].
std::vector<std::vector<std::vector<Expr>>> connection_curvature(const BundleModel& bundle);

/// Curvature of the canonical leafwise connection A = dp_k (x) d^k + dq^k (x) (d_k + i p_k c d_c)
/// on the trivial line bundle, in coordinates z = (q^1..q^n, p_1..p_n).
struct PrequantizationReport {
  int n = 0;
  std::vector<std::vector<ComplexField>> curvature;  // R_ij
  std::vector<std::vector<double>> symplectic;       // Omega_ij of dp_k ^ dq^k
  bool satisfied = false;                            // R == i Omega exactly
};

PrequantizationReport prequant_curvature_check(int n);

}  // namespace fqu
