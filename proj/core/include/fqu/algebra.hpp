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

// Classical observables on the vertical cotangent bundle: functions
// polynomial in the fiber momenta p_k with coefficient fields in (t, s, q).

#pragma once

#include <complex>
#include <map>
#include <span>
#include <vector>

#include "fqu/expr.hpp"

namespace fqu {

/// Sorted zero-based momentum indices (k1 <= ... <= kd).
using MultiIndex = std::vector<int>;

/// A point (t, s, q, p) of the phase space.
struct PhasePoint {
  double t = 0.0;
  std::vector<double> sigma;
  std::vector<double> q;
  std::vector<double> p;
};

VariableBinding binding_of(const PhasePoint& point);

class PolynomialObservable {
 public:
  PolynomialObservable(int m, int n);

  static PolynomialObservable constant(int m, int n, const Expr& value);
  /// p_k
  static PolynomialObservable momentum(int m, int n, int k);
  /// q^k
  static PolynomialObservable coordinate(int m, int n, int k);
  /// coeff * p_{k1} ... p_{kd}; `index` need not be sorted.
  static PolynomialObservable monomial(int m, int n, MultiIndex index, const Expr& coeff);

  int parameter_dim() const noexcept { return m_; }
  int fiber_dim() const noexcept { return n_; }
  /// Highest momentum degree among the nonzero terms (0 for the zero observable).
  int degree() const noexcept;
  bool is_zero() const noexcept { return terms_.empty(); }

  const std::map<MultiIndex, Expr>& terms() const noexcept { return terms_; }
  Expr coefficient(const MultiIndex& index) const;

  /// Adds coeff * p_index. Throws ModelError for an index out of range or a
  /// coefficient using variables outside (t, s, q).
  void add_term(MultiIndex index, const Expr& coeff);

  PolynomialObservable homogeneous_part(int d) const;
  /// Terms of degree <= d.
  PolynomialObservable truncated(int d) const;

  /// Partial derivative of the coefficients with respect to t, s_l or q_k (by name).
  PolynomialObservable coefficient_derivative(std::string_view var) const;
  /// Partial derivative with respect to the momentum p_k.
  PolynomialObservable momentum_derivative(int k) const;

  double evaluate(const PhasePoint& point) const;

  PolynomialObservable& operator+=(const PolynomialObservable& other);
  friend PolynomialObservable operator+(PolynomialObservable a, const PolynomialObservable& b);
  friend PolynomialObservable operator-(PolynomialObservable a, const PolynomialObservable& b);
  friend PolynomialObservable operator*(const PolynomialObservable& a, const PolynomialObservable& b);
  friend PolynomialObservable operator*(const Expr& s, const PolynomialObservable& a);

 private:
  void check_compatible(const PolynomialObservable& other) const;

  int m_;
  int n_;
  std::map<MultiIndex, Expr> terms_;
};

/// {f, g}_V = d^k f d_k g - d_k f d^k g  (d^k = d/dp_k, d_k = d/dq^k).
PolynomialObservable poisson_bracket_v(const PolynomialObservable& f, const PolynomialObservable& g);

/// Components (d_k f, d^k f) of the leafwise differential.
struct LeafwiseOneForm {
  std::vector<PolynomialObservable> dq;  // coefficient of dq^k
  std::vector<PolynomialObservable> dp;  // coefficient of dp_k
};

LeafwiseOneForm leafwise_differential(const PolynomialObservable& f);

struct HamiltonianVectorField {
  std::vector<PolynomialObservable> q_components;  // d^k f
  std::vector<PolynomialObservable> p_components;  // -d_k f

  /// Interior product with a leafwise one-form.
  PolynomialObservable contract(const LeafwiseOneForm& form) const;
};

HamiltonianVectorField hamiltonian_vector_field(const PolynomialObservable& f);

/// Membership in the quantum algebra: affine in momenta.
bool is_affine(const PolynomialObservable& f);

// ---------------------------------------------------------------------------
// Partition-of-unity decomposition into products of affine factors.

/// Axis-aligned chart window [lower, upper] on the fiber.
struct ChartWindow {
  std::vector<double> lower;
  std::vector<double> upper;
};

class BumpCover {
 public:
  /// `domain_lower`/`domain_upper` bound the fiber box the cover must cover.
  BumpCover(int n, std::vector<ChartWindow> windows, std::vector<double> domain_lower,
            std::vector<double> domain_upper);

  /// One chart containing the whole domain; its normalized function is 1.
  static BumpCover single_chart(int n, double lower, double upper);
  /// `charts` overlapping windows splitting [lower, upper] along axis 0.
  static BumpCover uniform(int n, int charts, double lower, double upper, double overlap);

  int fiber_dim() const noexcept { return n_; }
  int size() const noexcept { return static_cast<int>(windows_.size()); }
  const std::vector<ChartWindow>& windows() const noexcept { return windows_; }
  const std::vector<double>& domain_lower() const noexcept { return lower_; }
  const std::vector<double>& domain_upper() const noexcept { return upper_; }

  /// phi_xi: product of bumps over the window axes.
  Expr bump(int chart) const;
  /// l_xi = phi_xi (phi_1^d + ... + phi_r^d)^(-1/d)
  Expr normalized(int chart, int degree) const;

  /// Deterministic sample points of the domain box (about `count` of them).
  std::vector<std::vector<double>> domain_samples(int count) const;

  /// max |sum_xi l_xi^d - 1| over the samples; infinity if some sample is uncovered.
  double partition_defect(int degree, int samples) const;

 private:
  int n_;
  std::vector<ChartWindow> windows_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

struct AffineFactorization {
  int m = 0;
  int n = 0;
  /// Each term is a product of degree <= 1 factors.
  std::vector<std::vector<PolynomialObservable>> terms;

  double evaluate(const PhasePoint& point) const;
  PolynomialObservable expand() const;
};

/// Splits f into a sum of products of affine factors. The degree <= 1 part
/// forms a single one-factor term; every homogeneous part of degree d >= 2
/// contributes, per chart xi and monomial a p_k1..p_kd, the term
/// [l_xi a p_k1][l_xi p_k2]...[l_xi p_kd]. Throws CoverError when the cover
/// fails the partition check (sum l^d < 1 - 1e-9 somewhere on the domain).
AffineFactorization decompose_polynomial(const PolynomialObservable& f, const BumpCover& cover);

/// Element a p + a^l p_l + f of the extended algebra on T*Q, where p is the
/// momentum conjugate to t and p_l the momenta conjugate to the parameters.
struct ExtendedObservable {
  double time_coeff = 0.0;
  std::vector<Expr> parameter_coeffs;  // a^l(t, s)
  PolynomialObservable fiber;

  /// p_time and p_sigma are the values of p and p_l.
  double evaluate(const PhasePoint& point, double p_time, std::span<const double> p_sigma) const;
};

/// Throws ModelError if a parameter coefficient depends on q.
ExtendedObservable lift_to_tq_star(const PolynomialObservable& f, double time_coeff,
                                   std::vector<Expr> parameter_coeffs);

// ---------------------------------------------------------------------------

/// Complex-valued field held as a pair of real coefficient fields.
struct ComplexField {
  Expr re;
  Expr im;

  std::complex<double> evaluate(const VariableBinding& b) const { return {eval(re, b), eval(im, b)}; }
  bool is_exact_constant(std::complex<double> value) const {
    return re.is_constant() && im.is_constant() && re.value() == value.real() &&
           im.value() == value.imag();
  }
};

ComplexField operator+(const ComplexField& a, const ComplexField& b);
ComplexField operator-(const ComplexField& a, const ComplexField& b);
ComplexField operator*(const ComplexField& a, const ComplexField& b);
ComplexField operator*(std::complex<double> s, const ComplexField& a);
ComplexField diff(const ComplexField& f, std::string_view var);

}  // namespace fqu
