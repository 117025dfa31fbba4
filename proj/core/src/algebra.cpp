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

#include "fqu/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fqu/coordinates.hpp"
#include "fqu/error.hpp"

namespace fqu {

VariableBinding binding_of(const PhasePoint& point) {
  VariableBinding b;
  b[time_var()] = point.t;
  for (std::size_t l = 0; l < point.sigma.size(); ++l) b[sigma_var(static_cast<int>(l))] = point.sigma[l];
  for (std::size_t k = 0; k < point.q.size(); ++k) b[q_var(static_cast<int>(k))] = point.q[k];
  for (std::size_t k = 0; k < point.p.size(); ++k) b[p_var(static_cast<int>(k))] = point.p[k];
  return b;
}

// ---------------------------------------------------------------------------
// PolynomialObservable

PolynomialObservable::PolynomialObservable(int m, int n) : m_(m), n_(n) {
  if (m < 0 || n < 1) throw ModelError("observable needs m >= 0 and n >= 1");
}

PolynomialObservable PolynomialObservable::constant(int m, int n, const Expr& value) {
  return monomial(m, n, {}, value);
}

PolynomialObservable PolynomialObservable::momentum(int m, int n, int k) {
  return monomial(m, n, {k}, Expr::constant(1.0));
}

PolynomialObservable PolynomialObservable::coordinate(int m, int n, int k) {
  if (k < 0 || k >= n) throw ModelError("coordinate index out of range");
  return constant(m, n, Expr::variable(q_var(k)));
}

PolynomialObservable PolynomialObservable::monomial(int m, int n, MultiIndex index, const Expr& coeff) {
  PolynomialObservable f(m, n);
  f.add_term(std::move(index), coeff);
  return f;
}

int PolynomialObservable::degree() const noexcept {
  int d = 0;
  for (const auto& [index, coeff] : terms_) d = std::max(d, static_cast<int>(index.size()));
  return d;
}

Expr PolynomialObservable::coefficient(const MultiIndex& index) const {
  MultiIndex sorted = index;
  std::sort(sorted.begin(), sorted.end());
  const auto it = terms_.find(sorted);
  return it == terms_.end() ? Expr() : it->second;
}

void PolynomialObservable::add_term(MultiIndex index, const Expr& coeff) {
  for (int k : index) {
    if (k < 0 || k >= n_) throw ModelError("momentum index " + std::to_string(k + 1) + " out of range");
  }
  if (coeff.is_zero()) return;
  const auto allowed = coefficient_variables(m_, n_);
  for (const std::string& v : free_variables(coeff)) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      throw ModelError("coefficient uses variable '" + v + "' outside (t, s, q)");
    }
  }
  std::sort(index.begin(), index.end());
  auto it = terms_.find(index);
  if (it == terms_.end()) {
    terms_.emplace(std::move(index), coeff);
    return;
  }
  it->second = it->second + coeff;
  if (it->second.is_zero()) terms_.erase(it);
}

PolynomialObservable PolynomialObservable::homogeneous_part(int d) const {
  PolynomialObservable out(m_, n_);
  for (const auto& [index, coeff] : terms_) {
    if (static_cast<int>(index.size()) == d) out.terms_.emplace(index, coeff);
  }
  return out;
}

PolynomialObservable PolynomialObservable::truncated(int d) const {
  PolynomialObservable out(m_, n_);
  for (const auto& [index, coeff] : terms_) {
    if (static_cast<int>(index.size()) <= d) out.terms_.emplace(index, coeff);
  }
  return out;
}

PolynomialObservable PolynomialObservable::coefficient_derivative(std::string_view var) const {
  PolynomialObservable out(m_, n_);
  for (const auto& [index, coeff] : terms_) {
    Expr d = diff(coeff, var);
    if (!d.is_zero()) out.terms_.emplace(index, std::move(d));
  }
  return out;
}

PolynomialObservable PolynomialObservable::momentum_derivative(int k) const {
  PolynomialObservable out(m_, n_);
  for (const auto& [index, coeff] : terms_) {
    const auto count = std::count(index.begin(), index.end(), k);
    if (count == 0) continue;
    MultiIndex reduced = index;
    reduced.erase(std::find(reduced.begin(), reduced.end(), k));
    out.add_term(std::move(reduced), Expr::constant(static_cast<double>(count)) * coeff);
  }
  return out;
}

double PolynomialObservable::evaluate(const PhasePoint& point) const {
  if (static_cast<int>(point.p.size()) < n_) throw EvalError("phase point lacks momenta");
  const VariableBinding b = binding_of(point);
  double sum = 0.0;
  for (const auto& [index, coeff] : terms_) {
    double term = eval(coeff, b);
    for (int k : index) term *= point.p[static_cast<std::size_t>(k)];
    sum += term;
  }
  return sum;
}

void PolynomialObservable::check_compatible(const PolynomialObservable& other) const {
  if (m_ != other.m_ || n_ != other.n_) throw ModelError("observables have different dimensions");
}

PolynomialObservable& PolynomialObservable::operator+=(const PolynomialObservable& other) {
  check_compatible(other);
  for (const auto& [index, coeff] : other.terms_) add_term(index, coeff);
  return *this;
}

PolynomialObservable operator+(PolynomialObservable a, const PolynomialObservable& b) {
  a += b;
  return a;
}

PolynomialObservable operator-(PolynomialObservable a, const PolynomialObservable& b) {
  a.check_compatible(b);
  for (const auto& [index, coeff] : b.terms_) a.add_term(index, -coeff);
  return a;
}

PolynomialObservable operator*(const PolynomialObservable& a, const PolynomialObservable& b) {
  a.check_compatible(b);
  PolynomialObservable out(a.m_, a.n_);
  for (const auto& [ia, ca] : a.terms_) {
    for (const auto& [ib, cb] : b.terms_) {
      MultiIndex merged = ia;
      merged.insert(merged.end(), ib.begin(), ib.end());
      out.add_term(std::move(merged), ca * cb);
    }
  }
  return out;
}

PolynomialObservable operator*(const Expr& s, const PolynomialObservable& a) {
  PolynomialObservable out(a.m_, a.n_);
  for (const auto& [index, coeff] : a.terms_) out.add_term(index, s * coeff);
  return out;
}

PolynomialObservable poisson_bracket_v(const PolynomialObservable& f, const PolynomialObservable& g) {
  PolynomialObservable out(f.parameter_dim(), f.fiber_dim());
  for (int k = 0; k < f.fiber_dim(); ++k) {
    const std::string q = q_var(k);
    out += f.momentum_derivative(k) * g.coefficient_derivative(q);
    out = out - f.coefficient_derivative(q) * g.momentum_derivative(k);
  }
  return out;
}

LeafwiseOneForm leafwise_differential(const PolynomialObservable& f) {
  LeafwiseOneForm form;
  for (int k = 0; k < f.fiber_dim(); ++k) {
    form.dq.push_back(f.coefficient_derivative(q_var(k)));
    form.dp.push_back(f.momentum_derivative(k));
  }
  return form;
}

PolynomialObservable HamiltonianVectorField::contract(const LeafwiseOneForm& form) const {
  PolynomialObservable out(q_components.at(0).parameter_dim(), q_components.at(0).fiber_dim());
  for (std::size_t k = 0; k < q_components.size(); ++k) {
    out += q_components[k] * form.dq.at(k);
    out += p_components[k] * form.dp.at(k);
  }
  return out;
}

HamiltonianVectorField hamiltonian_vector_field(const PolynomialObservable& f) {
  HamiltonianVectorField v;
  const PolynomialObservable zero(f.parameter_dim(), f.fiber_dim());
  for (int k = 0; k < f.fiber_dim(); ++k) {
    v.q_components.push_back(f.momentum_derivative(k));
    v.p_components.push_back(zero - f.coefficient_derivative(q_var(k)));
  }
  return v;
}

bool is_affine(const PolynomialObservable& f) { return f.degree() <= 1; }

// ---------------------------------------------------------------------------
// BumpCover

BumpCover::BumpCover(int n, std::vector<ChartWindow> windows, std::vector<double> domain_lower,
                     std::vector<double> domain_upper)
    : n_(n), windows_(std::move(windows)), lower_(std::move(domain_lower)), upper_(std::move(domain_upper)) {
  if (windows_.empty()) throw ModelError("cover needs at least one chart");
  if (static_cast<int>(lower_.size()) != n || static_cast<int>(upper_.size()) != n) {
    throw ModelError("cover domain dimension mismatch");
  }
  for (const ChartWindow& w : windows_) {
    if (static_cast<int>(w.lower.size()) != n || static_cast<int>(w.upper.size()) != n) {
      throw ModelError("chart window dimension mismatch");
    }
    for (int a = 0; a < n; ++a) {
      if (!(w.upper[a] > w.lower[a])) throw ModelError("chart window is empty");
    }
  }
}

BumpCover BumpCover::single_chart(int n, double lower, double upper) {
  const double pad = 0.5 * (upper - lower);
  ChartWindow w{std::vector<double>(n, lower - pad), std::vector<double>(n, upper + pad)};
  return BumpCover(n, {w}, std::vector<double>(n, lower), std::vector<double>(n, upper));
}

BumpCover BumpCover::uniform(int n, int charts, double lower, double upper, double overlap) {
  if (charts < 1) throw ModelError("cover needs at least one chart");
  std::vector<ChartWindow> windows;
  const double width = (upper - lower) / charts;
  for (int c = 0; c < charts; ++c) {
    ChartWindow w{std::vector<double>(n, lower - overlap), std::vector<double>(n, upper + overlap)};
    w.lower[0] = lower + c * width - overlap;
    w.upper[0] = lower + (c + 1) * width + overlap;
    windows.push_back(std::move(w));
  }
  return BumpCover(n, std::move(windows), std::vector<double>(n, lower), std::vector<double>(n, upper));
}

Expr BumpCover::bump(int chart) const {
  const ChartWindow& w = windows_.at(static_cast<std::size_t>(chart));
  Expr phi = Expr::constant(1.0);
  for (int a = 0; a < n_; ++a) {
    const double center = 0.5 * (w.lower[a] + w.upper[a]);
    const double radius = 0.5 * (w.upper[a] - w.lower[a]);
    phi = phi * fqu::bump(Expr::variable(q_var(a)), Expr::constant(center), Expr::constant(radius));
  }
  return phi;
}

Expr BumpCover::normalized(int chart, int degree) const {
  if (degree < 1) throw ModelError("normalization degree must be positive");
  if (size() == 1) return Expr::constant(1.0);
  Expr sum;
  for (int c = 0; c < size(); ++c) sum = sum + pow(bump(c), degree);
  return bump(chart) / root(sum, degree);
}

std::vector<std::vector<double>> BumpCover::domain_samples(int count) const {
  const int per_axis = n_ == 1 ? count : static_cast<int>(std::ceil(std::pow(count, 1.0 / n_)));
  std::vector<std::vector<double>> out;
  std::vector<int> idx(static_cast<std::size_t>(n_), 0);
  for (;;) {
    std::vector<double> point(static_cast<std::size_t>(n_));
    for (int a = 0; a < n_; ++a) {
      const double frac = per_axis == 1 ? 0.5 : static_cast<double>(idx[a]) / (per_axis - 1);
      point[a] = lower_[a] + frac * (upper_[a] - lower_[a]);
    }
    out.push_back(std::move(point));
    int a = 0;
    while (a < n_ && ++idx[a] == per_axis) idx[a++] = 0;
    if (a == n_) break;
  }
  return out;
}

double BumpCover::partition_defect(int degree, int samples) const {
  std::vector<std::string> slots;
  for (int a = 0; a < n_; ++a) slots.push_back(q_var(a));
  std::vector<CompiledExpr> ls;
  for (int c = 0; c < size(); ++c) ls.emplace_back(normalized(c, degree), slots);
  double worst = 0.0;
  for (const auto& point : domain_samples(samples)) {
    double sum = 0.0;
    try {
      for (const CompiledExpr& l : ls) sum += std::pow(l(point), degree);
    } catch (const EvalError&) {
      return std::numeric_limits<double>::infinity();
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Decomposition

double AffineFactorization::evaluate(const PhasePoint& point) const {
  double sum = 0.0;
  for (const auto& term : terms) {
    double product = 1.0;
    for (const auto& factor : term) product *= factor.evaluate(point);
    sum += product;
  }
  return sum;
}

PolynomialObservable AffineFactorization::expand() const {
  PolynomialObservable out(m, n);
  for (const auto& term : terms) {
    PolynomialObservable product = PolynomialObservable::constant(m, n, Expr::constant(1.0));
    for (const auto& factor : term) product = product * factor;
    out += product;
  }
  return out;
}

AffineFactorization decompose_polynomial(const PolynomialObservable& f, const BumpCover& cover) {
  const int m = f.parameter_dim();
  const int n = f.fiber_dim();
  if (cover.fiber_dim() != n) throw ModelError("cover dimension does not match the observable");

  AffineFactorization out{m, n, {}};
  const PolynomialObservable affine = f.truncated(1);
  if (!affine.is_zero()) out.terms.push_back({affine});

  constexpr double kCoverTolerance = 1e-9;
  for (int d = 2; d <= f.degree(); ++d) {
    const PolynomialObservable part = f.homogeneous_part(d);
    if (part.is_zero()) continue;
    if (cover.partition_defect(d, 200) > kCoverTolerance) {
      throw CoverError("cover does not cover the fiber domain for degree " + std::to_string(d));
    }
    for (int chart = 0; chart < cover.size(); ++chart) {
      const Expr l = cover.normalized(chart, d);
      for (const auto& [index, coeff] : part.terms()) {
        std::vector<PolynomialObservable> factors;
        factors.push_back(PolynomialObservable::monomial(m, n, {index[0]}, l * coeff));
        for (std::size_t i = 1; i < index.size(); ++i) {
          factors.push_back(PolynomialObservable::monomial(m, n, {index[i]}, l));
        }
        out.terms.push_back(std::move(factors));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Extended algebra

double ExtendedObservable::evaluate(const PhasePoint& point, double p_time,
                                    std::span<const double> p_sigma) const {
  const VariableBinding b = binding_of(point);
  double sum = time_coeff * p_time;
  for (std::size_t l = 0; l < parameter_coeffs.size(); ++l) sum += eval(parameter_coeffs[l], b) * p_sigma[l];
  return sum + fiber.evaluate(point);
}

ExtendedObservable lift_to_tq_star(const PolynomialObservable& f, double time_coeff,
                                   std::vector<Expr> parameter_coeffs) {
  if (parameter_coeffs.empty()) {
    parameter_coeffs.assign(static_cast<std::size_t>(f.parameter_dim()), Expr());
  }
  if (static_cast<int>(parameter_coeffs.size()) != f.parameter_dim()) {
    throw ModelError("expected one parameter coefficient per parameter");
  }
  const auto allowed = parameter_variables(f.parameter_dim());
  for (const Expr& a : parameter_coeffs) {
    for (const std::string& v : free_variables(a)) {
      if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
        throw ModelError("parameter coefficient depends on '" + v + "'; only (t, s) allowed");
      }
    }
  }
  return ExtendedObservable{time_coeff, std::move(parameter_coeffs), f};
}

// ---------------------------------------------------------------------------
// ComplexField

ComplexField operator+(const ComplexField& a, const ComplexField& b) { return {a.re + b.re, a.im + b.im}; }
ComplexField operator-(const ComplexField& a, const ComplexField& b) { return {a.re - b.re, a.im - b.im}; }

ComplexField operator*(const ComplexField& a, const ComplexField& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

ComplexField operator*(std::complex<double> s, const ComplexField& a) {
  const Expr sr = Expr::constant(s.real());
  const Expr si = Expr::constant(s.imag());
  return {sr * a.re - si * a.im, sr * a.im + si * a.re};
}

ComplexField diff(const ComplexField& f, std::string_view var) { return {diff(f.re, var), diff(f.im, var)}; }

}  // namespace fqu
