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

#include "fqu/bundle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fqu/coordinates.hpp"
#include "fqu/error.hpp"

namespace fqu {

namespace {

void check_scope(const Expr& e, const std::vector<std::string>& allowed, const std::string& what) {
  for (const std::string& v : free_variables(e)) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      throw ModelError(what + " uses variable '" + v + "' outside its scope");
    }
  }
}

}  // namespace

BundleModel BundleModel::flat(int m, int n) {
  BundleModel b;
  b.m = m;
  b.n = n;
  b.sigma_connection.assign(static_cast<std::size_t>(n), std::vector<Expr>(static_cast<std::size_t>(m)));
  b.time_drift.assign(static_cast<std::size_t>(n), Expr());
  return b;
}

void BundleModel::validate() const {
  if (m < 1 || n < 1) throw ModelError("bundle needs m >= 1 and n >= 1");
  if (static_cast<int>(sigma_connection.size()) != n) throw ModelError("connection needs n rows");
  if (static_cast<int>(time_drift.size()) != n) throw ModelError("drift needs n components");
  const auto vars = coefficient_variables(m, n);
  for (int k = 0; k < n; ++k) {
    if (static_cast<int>(sigma_connection[k].size()) != m) throw ModelError("connection row needs m entries");
    for (int l = 0; l < m; ++l) check_scope(sigma_connection[k][l], vars, "connection component");
    check_scope(time_drift[k], vars, "drift component");
  }
  if (gamma) {
    if (static_cast<int>(gamma->size()) != m) throw ModelError("gamma needs m components");
    const auto pvars = parameter_variables(m);
    for (const Expr& g : *gamma) check_scope(g, pvars, "gamma component");
  }
}

// ---------------------------------------------------------------------------
// CubicSpline

CubicSpline::CubicSpline(std::vector<double> knots, std::vector<double> values, bool periodic)
    : x_(std::move(knots)), y_(std::move(values)) {
  const std::size_t count = x_.size();
  if (count < 4) throw ModelError("cubic spline needs at least 4 knots");
  if (y_.size() != count) throw ModelError("spline knots and values differ in length");
  for (std::size_t i = 1; i < count; ++i) {
    if (!(x_[i] > x_[i - 1])) throw ModelError("spline knots must be strictly increasing");
  }
  const auto n = static_cast<Eigen::Index>(count);
  std::vector<double> h(count - 1);
  for (std::size_t i = 0; i + 1 < count; ++i) h[i] = x_[i + 1] - x_[i];
  auto slope = [&](std::size_t i) { return (y_[i + 1] - y_[i]) / h[i]; };

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 1; i + 1 < count; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    a(r, r - 1) = h[i - 1];
    a(r, r) = 2.0 * (h[i - 1] + h[i]);
    a(r, r + 1) = h[i];
    rhs(r) = 6.0 * (slope(i) - slope(i - 1));
  }
  if (periodic) {
    if (std::abs(y_.front() - y_.back()) > 1e-12) throw ModelError("periodic spline needs matching end values");
    const std::size_t last = count - 2;
    a(0, 0) = 2.0 * (h[last] + h[0]);
    a(0, 1) = h[0];
    a(0, static_cast<Eigen::Index>(last)) = h[last];
    rhs(0) = 6.0 * (slope(0) - slope(last));
    a(n - 1, 0) = 1.0;
    a(n - 1, n - 1) = -1.0;
  } else {
    // not-a-knot: continuous third derivative at the second and penultimate knots
    a(0, 0) = h[1];
    a(0, 1) = -(h[0] + h[1]);
    a(0, 2) = h[0];
    const std::size_t e = count - 1;
    a(n - 1, n - 3) = h[e - 1];
    a(n - 1, n - 2) = -(h[e - 2] + h[e - 1]);
    a(n - 1, n - 1) = h[e - 2];
  }
  const Eigen::VectorXd second = a.partialPivLu().solve(rhs);
  m_.assign(second.data(), second.data() + n);
}

std::size_t CubicSpline::segment(double t) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), t);
  const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - x_.begin() - 1, 0));
  return std::min(i, x_.size() - 2);
}

double CubicSpline::value(double t) const {
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double t) const {
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m_[i] + (3.0 * b * b - 1.0) / 6.0 * h * m_[i + 1];
}

// ---------------------------------------------------------------------------
// ParameterPath

namespace {
const std::vector<std::string>& time_slots() {
  static const std::vector<std::string> slots{time_var()};
  return slots;
}
}  // namespace

ParameterPath ParameterPath::closed_form(std::vector<Expr> components, double t0, double t1, bool closed) {
  if (components.empty()) throw ModelError("path needs at least one component");
  if (!(t1 > t0)) throw ModelError("path span must satisfy t0 < t1");
  ParameterPath p;
  p.dim_ = static_cast<int>(components.size());
  p.t0_ = t0;
  p.t1_ = t1;
  p.closed_ = closed;
  p.exprs_ = std::move(components);
  for (const Expr& e : p.exprs_) check_scope(e, time_slots(), "path component");
  p.finish_closed_form();
  p.check_closed();
  return p;
}

void ParameterPath::finish_closed_form() {
  position_.clear();
  velocity_.clear();
  for (const Expr& e : exprs_) {
    position_.emplace_back(e, time_slots());
    velocity_.emplace_back(diff(e, time_var()), time_slots());
  }
}

ParameterPath ParameterPath::sampled(std::vector<double> knots, std::vector<std::vector<double>> values,
                                     bool closed) {
  if (knots.size() < 4) throw ModelError("sampled path needs at least 4 knots");
  if (values.size() != knots.size()) throw ModelError("sampled path needs one value per knot");
  ParameterPath p;
  p.dim_ = static_cast<int>(values.front().size());
  if (p.dim_ < 1) throw ModelError("path needs at least one component");
  p.t0_ = knots.front();
  p.t1_ = knots.back();
  p.closed_ = closed;
  for (int l = 0; l < p.dim_; ++l) {
    std::vector<double> column;
    for (const auto& v : values) {
      if (static_cast<int>(v.size()) != p.dim_) throw ModelError("sampled path values differ in dimension");
      column.push_back(v[static_cast<std::size_t>(l)]);
    }
    p.splines_.emplace_back(knots, std::move(column), closed);
  }
  p.check_closed();
  return p;
}

void ParameterPath::check_closed() const {
  if (!closed_) return;
  const auto a = position(t0_);
  const auto b = position(t1_);
  for (int l = 0; l < dim_; ++l) {
    if (std::abs(a[l] - b[l]) > 1e-12) throw ModelError("path flagged closed has distinct end points");
  }
}

double ParameterPath::warp_time(double t) const {
  if (!warp_) return t;
  const double v = t;
  return (*warp_)(std::span<const double>(&v, 1));
}

std::vector<double> ParameterPath::position(double t) const {
  std::vector<double> out(static_cast<std::size_t>(dim_));
  if (is_closed_form()) {
    for (int l = 0; l < dim_; ++l) out[l] = position_[l](std::span<const double>(&t, 1));
    return out;
  }
  const double tau = warp_time(t);
  for (int l = 0; l < dim_; ++l) out[l] = splines_[l].value(tau);
  return out;
}

std::vector<double> ParameterPath::velocity(double t) const {
  std::vector<double> out(static_cast<std::size_t>(dim_));
  if (is_closed_form()) {
    for (int l = 0; l < dim_; ++l) out[l] = velocity_[l](std::span<const double>(&t, 1));
    return out;
  }
  const double tau = warp_time(t);
  const double rate = warp_rate_ ? (*warp_rate_)(std::span<const double>(&t, 1)) : 1.0;
  for (int l = 0; l < dim_; ++l) out[l] = splines_[l].derivative(tau) * rate;
  return out;
}

ParameterPath ParameterPath::warped(const Expr& warp) const {
  check_scope(warp, time_slots(), "warp");
  const CompiledExpr w(warp, time_slots());
  const CompiledExpr rate(diff(warp, time_var()), time_slots());
  auto at = [](const CompiledExpr& f, double t) { return f(std::span<const double>(&t, 1)); };
  const double scale = std::max(1.0, std::max(std::abs(t0_), std::abs(t1_)));
  if (std::abs(at(w, t0_) - t0_) > 1e-9 * scale || std::abs(at(w, t1_) - t1_) > 1e-9 * scale) {
    throw ModelError("warp must fix both end points of the span");
  }
  // warp' may vanish at isolated points (t^2 at 0) but never turn negative,
  // and the sampled values must increase strictly.
  constexpr int kChecks = 1001;
  double previous = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kChecks; ++i) {
    const double t = t0_ + (t1_ - t0_) * i / (kChecks - 1);
    const double value = at(w, t);
    if (!(at(rate, t) >= 0.0) || !(value > previous)) {
      throw ModelError("warp is not strictly increasing on the span");
    }
    previous = value;
  }

  if (is_closed_form()) {
    std::vector<Expr> components;
    for (const Expr& e : exprs_) components.push_back(substitute(e, time_var(), warp));
    return closed_form(std::move(components), t0_, t1_, closed_);
  }
  ParameterPath p = *this;
  // chi(old(new(t))) when the sampled path already carries a warp
  const Expr composed = warp_expr_ ? substitute(*warp_expr_, time_var(), warp) : warp;
  p.warp_expr_ = composed;
  p.warp_ = CompiledExpr(composed, time_slots());
  p.warp_rate_ = CompiledExpr(diff(composed, time_var()), time_slots());
  return p;
}

// ---------------------------------------------------------------------------

GammaField::GammaField(ParameterPath path) : path_(std::move(path)) {
  if (path_.is_closed_form()) {
    std::vector<Expr> components;
    for (const Expr& e : path_.expressions()) components.push_back(diff(e, time_var()));
    exprs_ = std::move(components);
  }
}

std::vector<double> GammaField::evaluate(double t, std::span<const double> /*sigma*/) const {
  return path_.velocity(t);
}

GammaField gamma_from_path(const ParameterPath& path) { return GammaField(path); }

CompositeConnection composite_connection(std::span<const Expr> gamma, const BundleModel& bundle) {
  bundle.validate();
  if (static_cast<int>(gamma.size()) != bundle.m) throw ModelError("gamma dimension does not match the bundle");
  CompositeConnection out;
  out.parameter_drift.assign(gamma.begin(), gamma.end());
  for (int k = 0; k < bundle.n; ++k) {
    Expr drift = bundle.time_drift[k];
    for (int l = 0; l < bundle.m; ++l) drift = drift + gamma[l] * bundle.sigma_connection[k][l];
    out.fiber_drift.push_back(drift);
  }
  return out;
}

std::vector<std::vector<std::vector<Expr>>> connection_curvature(const BundleModel& bundle) {
  bundle.validate();
  const int n = bundle.n;
  const int m = bundle.m;
  const auto& L = bundle.sigma_connection;
  std::vector<std::vector<std::vector<Expr>>> f(
      static_cast<std::size_t>(n),
      std::vector<std::vector<Expr>>(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m))));
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < m; ++l) {
      for (int mu = 0; mu < m; ++mu) {
        Expr v = diff(L[k][mu], sigma_var(l)) - diff(L[k][l], sigma_var(mu));
        for (int j = 0; j < n; ++j) {
          v = v + L[j][l] * diff(L[k][mu], q_var(j)) - L[j][mu] * diff(L[k][l], q_var(j));
        }
        f[k][l][mu] = v;
      }
    }
  }
  return f;
}

PrequantizationReport prequant_curvature_check(int n) {
  if (n < 1) throw ModelError("prequantization check needs n >= 1");
  const int dim = 2 * n;
  std::vector<std::string> coords;
  std::vector<ComplexField> potential;
  for (int k = 0; k < n; ++k) {
    coords.push_back(q_var(k));
    potential.push_back({Expr(), Expr::variable(p_var(k))});  // A_{q^k} = i p_k
  }
  for (int k = 0; k < n; ++k) {
    coords.push_back(p_var(k));
    potential.push_back({Expr(), Expr()});  // A_{p_k} = 0
  }

  PrequantizationReport report;
  report.n = n;
  report.curvature.assign(static_cast<std::size_t>(dim), std::vector<ComplexField>(static_cast<std::size_t>(dim)));
  report.symplectic.assign(static_cast<std::size_t>(dim), std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  for (int k = 0; k < n; ++k) {
    report.symplectic[n + k][k] = 1.0;
    report.symplectic[k][n + k] = -1.0;
  }
  report.satisfied = true;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      ComplexField r = diff(potential[j], coords[i]) - diff(potential[i], coords[j]);
      if (!r.is_exact_constant({0.0, report.symplectic[i][j]})) report.satisfied = false;
      report.curvature[i][j] = std::move(r);
    }
  }
  return report;
}

}  // namespace fqu
