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

#include "fqu/evolve.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fqu/coordinates.hpp"
#include "fqu/error.hpp"
#include "fqu/propagator.hpp"

namespace fqu {
namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kHermiticityLimit = 1e-10;
constexpr int kCommutatorSamples = 32;

std::vector<double> difference(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

double unitarity_defect(const DenseMatrix& U) {
  return (U.adjoint() * U - DenseMatrix::Identity(U.rows(), U.cols())).norm();
}

void check_steps(int steps) {
  if (steps < 1) throw ModelError("step count must be at least 1, got " + std::to_string(steps));
}

double end_time(const DrivenHamiltonian& dh, std::optional<double> t_end) {
  const double t1 = t_end.value_or(dh.path().t1());
  if (!std::isfinite(t1) || t1 < dh.path().t0()) throw ModelError("end time lies before the path start");
  return t1;
}

// Overlap <psi0|psi> with the fiberwise weight h^n.
Complex overlap(const FiberGrid& grid, const StateVector& psi0, const StateVector& psi) {
  return grid.cell_volume() * psi0.dot(psi);
}

struct PhaseTracker {
  double wrapped = 0.0;
  double unwrapped = 0.0;

  void update(Complex z) {
    const double next = std::arg(z);
    unwrapped += wrap_phase(next - wrapped);
    wrapped = next;
  }
};

}  // namespace

double wrap_phase(double angle) {
  double a = std::remainder(angle, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

// ---------------------------------------------------------------------------
// DrivenHamiltonian

DrivenHamiltonian::DrivenHamiltonian(BundleModel bundle, ParameterPath path, PolynomialObservable dynamic,
                                     BumpCover cover, FiberGrid grid, OrderingRule ordering)
    : bundle_(std::move(bundle)),
      path_(std::move(path)),
      dynamic_(std::move(dynamic)),
      cover_(std::move(cover)),
      grid_(grid),
      ordering_(ordering) {
  bundle_.validate();
  const int m = bundle_.m;
  const int n = bundle_.n;
  if (path_.dimension() != m) throw ModelError("path dimension differs from the parameter dimension");
  if (dynamic_.parameter_dim() != m || dynamic_.fiber_dim() != n) {
    throw ModelError("dynamic Hamiltonian dimensions differ from the bundle");
  }
  if (cover_.fiber_dim() != n) throw ModelError("cover dimension differs from the fiber dimension");
  if (grid_.dimension() != n) throw ModelError("grid dimension differs from the fiber dimension");

  const auto slots = coefficient_variables(m, n);
  lambda_.resize(n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < m; ++l) lambda_[k].emplace_back(bundle_.sigma_connection[k][l], slots);
    drift_.emplace_back(bundle_.time_drift[k], slots);
    if (!bundle_.time_drift[k].is_zero()) has_drift_ = true;
  }
  quantizer_ = std::make_shared<const PolynomialQuantizer>(dynamic_, cover_, grid_, ordering_);
}

LinearOperator DrivenHamiltonian::transport_generator(double t, std::span<const double> sigma,
                                                      std::span<const double> dsigma) const {
  const int m = bundle_.m;
  if (static_cast<int>(sigma.size()) != m || static_cast<int>(dsigma.size()) != m) {
    throw ModelError("transport generator needs " + std::to_string(m) + " parameter components");
  }
  std::vector<Eigen::VectorXd> a(bundle_.n, Eigen::VectorXd::Zero(grid_.size()));
  for (int k = 0; k < bundle_.n; ++k) {
    for (int l = 0; l < m; ++l) {
      if (dsigma[l] != 0.0) a[k] += dsigma[l] * sample_field(lambda_[k][l], grid_, t, sigma);
    }
  }
  return first_order_operator(grid_, a, Eigen::VectorXd::Zero(grid_.size()));
}

LinearOperator DrivenHamiltonian::geometric_generator(double t) const {
  return transport_generator(t, path_.position(t), path_.velocity(t));
}

LinearOperator DrivenHamiltonian::dynamic_operator(double t) const {
  const std::vector<double> sigma = path_.position(t);
  LinearOperator out = quantizer_->assemble(t, sigma);
  if (has_drift_) {
    std::vector<Eigen::VectorXd> a;
    for (int k = 0; k < bundle_.n; ++k) a.push_back(sample_field(drift_[k], grid_, t, sigma));
    out += first_order_operator(grid_, a, Eigen::VectorXd::Zero(grid_.size()));
  }
  return out;
}

LinearOperator DrivenHamiltonian::hamiltonian(double t) const {
  return geometric_generator(t) + dynamic_operator(t);
}

PolynomialObservable DrivenHamiltonian::classical_hamiltonian(double t) const {
  const std::vector<double> v = path_.velocity(t);
  PolynomialObservable h = dynamic_;
  for (int k = 0; k < bundle_.n; ++k) {
    Expr coeff = bundle_.time_drift[k];
    for (int l = 0; l < bundle_.m; ++l) coeff = coeff + Expr::constant(v[l]) * bundle_.sigma_connection[k][l];
    h.add_term({k}, coeff);
  }
  return h;
}

DrivenHamiltonian DrivenHamiltonian::with_path(ParameterPath path) const {
  return DrivenHamiltonian(bundle_, std::move(path), dynamic_, cover_, grid_, ordering_);
}

DrivenHamiltonian DrivenHamiltonian::with_grid(FiberGrid grid) const {
  return DrivenHamiltonian(bundle_, path_, dynamic_, cover_, grid, ordering_);
}

// ---------------------------------------------------------------------------
// Time-ordered evolution

EvolutionResult evolve_time_ordered(const DrivenHamiltonian& dh, const EvolutionOptions& options) {
  check_steps(options.steps);
  if (options.sample_every < 1) throw ModelError("sample_every must be at least 1");
  const FiberGrid& grid = dh.grid();
  const int n = grid.dimension();
  const double t0 = dh.path().t0();
  const double t1 = end_time(dh, options.t_end);
  const double dt = (t1 - t0) / options.steps;

  const auto generator = [&](double t) {
    switch (options.part) {
      case GeneratorPart::Geometric:
        return dh.geometric_generator(t);
      case GeneratorPart::Dynamic:
        return dh.dynamic_operator(t);
      case GeneratorPart::Full:
        break;
    }
    return dh.hamiltonian(t);
  };

  EvolutionResult result;
  result.steps = options.steps;

  std::optional<DenseMatrix> U;
  if (options.compute_unitary) U = DenseMatrix::Identity(grid.size(), grid.size());

  const bool has_state = options.initial.has_value();
  StateVector psi0;
  StateVector psi;
  StateVector psi_geo;
  double norm0 = 0.0;
  if (has_state) {
    if (!(options.initial->grid == grid)) throw ModelError("initial state lives on a different grid");
    psi0 = options.initial->amplitudes;
    psi = psi0;
    psi_geo = psi0;
    norm0 = overlap(grid, psi0, psi0).real();
    if (!(norm0 > 0.0)) throw ModelError("initial state has zero norm");
  }

  std::vector<LinearOperator> position;
  std::vector<LinearOperator> momentum;
  if (options.emit_trajectory && has_state) {
    for (int a = 0; a < n; ++a) {
      position.push_back(position_operator(grid, a));
      momentum.push_back((-kI) * derivative_matrix(grid, a));
    }
  }

  PhaseTracker total_phase;
  PhaseTracker geometric_phase;
  double max_norm_defect = 0.0;

  const auto record = [&](double t) {
    TrajectorySample row;
    row.t = t;
    row.sigma = dh.path().position(t);
    row.dsigma_dt = dh.path().velocity(t);
    if (has_state) {
      const WaveSection section{grid, psi, t, row.sigma};
      for (int a = 0; a < n; ++a) {
        row.exp_q.push_back(expectation(position[a], section));
        row.exp_p.push_back(expectation(momentum[a], section));
      }
      row.norm = overlap(grid, psi, psi).real();
      row.phase_total = total_phase.wrapped;
      row.phase_total_unwrapped = total_phase.unwrapped;
      row.phase_geometric = geometric_phase.wrapped;
      row.phase_geometric_unwrapped = geometric_phase.unwrapped;
    }
    row.unitarity_defect = U ? unitarity_defect(*U) : std::abs(row.norm - norm0) / std::max(norm0, 1e-300);
    result.trajectory.push_back(std::move(row));
  };

  if (has_state) {
    total_phase.update(overlap(grid, psi0, psi));
    geometric_phase.update(overlap(grid, psi0, psi_geo));
  }
  if (options.emit_trajectory) record(t0);

  LinearOperator previous;
  DenseMatrix previous_step;
  bool have_previous = false;
  std::vector<double> sigma_prev = dh.path().position(t0);

  for (int j = 0; j < options.steps; ++j) {
    const double tm = t0 + (j + 0.5) * dt;
    const double tn = t0 + (j + 1) * dt;
    const LinearOperator H = generator(tm);
    const double defect = hermiticity_defect(H);
    result.max_hermiticity_defect = std::max(result.max_hermiticity_defect, defect);
    if (defect > kHermiticityLimit) {
      throw NumericalError("non-Hermitian step operator at t = " + std::to_string(tm) +
                           " (defect " + std::to_string(defect) + ")");
    }

    if (U) {
      if (!have_previous || !H.identical_to(previous)) {
        previous_step = unitary_exponential(H.dense(), dt);
        previous = H;
        have_previous = true;
      }
      *U = previous_step * *U;
      if (has_state) psi = previous_step * psi;
    } else if (has_state) {
      psi = krylov_exponential(H.matrix(), dt, psi);
    }

    std::vector<double> sigma_next = dh.path().position(tn);
    if (has_state) {
      const std::vector<double> ds = difference(sigma_next, sigma_prev);
      const LinearOperator segment = dh.transport_generator(tm, dh.path().position(tm), ds);
      psi_geo = krylov_exponential(segment.matrix(), 1.0, psi_geo);
      total_phase.update(overlap(grid, psi0, psi));
      geometric_phase.update(overlap(grid, psi0, psi_geo));
      const double norm = overlap(grid, psi, psi).real();
      max_norm_defect = std::max(max_norm_defect, std::abs(norm - norm0) / norm0);
      if (!std::isfinite(norm)) throw NumericalError("state became non-finite at t = " + std::to_string(tn));
    }
    sigma_prev = std::move(sigma_next);

    if (options.emit_trajectory && ((j + 1) % options.sample_every == 0 || j + 1 == options.steps)) record(tn);
  }

  if (U) {
    result.unitarity_defect = unitarity_defect(*U);
    result.unitary = std::move(U);
  } else {
    result.unitarity_defect = max_norm_defect;
  }
  if (has_state) {
    result.final_state = WaveSection{grid, psi, t1, dh.path().position(t1)};
    result.phase_total = total_phase.wrapped;
    result.phase_total_unwrapped = total_phase.unwrapped;
    result.phase_geometric = geometric_phase.wrapped;
    result.phase_geometric_unwrapped = geometric_phase.unwrapped;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Geometric factor

namespace {

template <typename Step>
void for_each_segment(const DrivenHamiltonian& dh, double t_end, int segments, Step&& step) {
  check_steps(segments);
  const double t0 = dh.path().t0();
  const double t1 = end_time(dh, t_end);
  const double dt = (t1 - t0) / segments;
  std::vector<double> sigma_prev = dh.path().position(t0);
  for (int j = 0; j < segments; ++j) {
    const double tm = t0 + (j + 0.5) * dt;
    std::vector<double> sigma_next = dh.path().position(t0 + (j + 1) * dt);
    const LinearOperator G = dh.transport_generator(tm, dh.path().position(tm), difference(sigma_next, sigma_prev));
    const double defect = hermiticity_defect(G);
    if (defect > kHermiticityLimit) throw NumericalError("non-Hermitian transport generator");
    step(G);
    sigma_prev = std::move(sigma_next);
  }
}

}  // namespace

DenseMatrix geometric_factor(const DrivenHamiltonian& dh, double t_end, int segments) {
  DenseMatrix U = DenseMatrix::Identity(dh.grid().size(), dh.grid().size());
  for_each_segment(dh, t_end, segments, [&](const LinearOperator& G) { U = unitary_exponential(G.dense(), 1.0) * U; });
  return U;
}

WaveSection geometric_transport(const DrivenHamiltonian& dh, const WaveSection& psi, double t_end, int segments) {
  if (!(psi.grid == dh.grid())) throw ModelError("section lives on a different grid");
  StateVector v = psi.amplitudes;
  for_each_segment(dh, t_end, segments, [&](const LinearOperator& G) { v = krylov_exponential(G.matrix(), 1.0, v); });
  const double t1 = end_time(dh, t_end);
  return WaveSection{psi.grid, std::move(v), t1, dh.path().position(t1)};
}

ConvergenceReport geometric_convergence(const DrivenHamiltonian& dh, int base_segments) {
  check_steps(base_segments);
  const double t1 = dh.path().t1();
  const DenseMatrix U1 = geometric_factor(dh, t1, base_segments);
  const DenseMatrix U2 = geometric_factor(dh, t1, 2 * base_segments);
  const DenseMatrix U4 = geometric_factor(dh, t1, 4 * base_segments);
  ConvergenceReport report;
  report.base_segments = base_segments;
  report.coarse_difference = (U1 - U2).norm();
  report.fine_difference = (U2 - U4).norm();
  report.ratio = report.fine_difference > 0.0 ? report.coarse_difference / report.fine_difference
                                              : std::numeric_limits<double>::infinity();
  const DenseMatrix coarse = (4.0 * U2 - U1) / 3.0;
  report.richardson = (4.0 * U4 - U2) / 3.0;
  report.richardson_stability = (report.richardson - coarse).norm();
  report.holonomy_norm = (report.richardson - DenseMatrix::Identity(U1.rows(), U1.cols())).norm();
  return report;
}

// ---------------------------------------------------------------------------
// Splitting

double commutator_report(const DrivenHamiltonian& dh, double t_end) {
  const double t0 = dh.path().t0();
  const double t1 = end_time(dh, t_end);
  double worst = 0.0;
  for (int i = 0; i < kCommutatorSamples; ++i) {
    const double t = t0 + (i + 0.5) * (t1 - t0) / kCommutatorSamples;
    const LinearOperator G = dh.geometric_generator(t);
    const LinearOperator Hp = dh.dynamic_operator(t);
    const double scale = G.frobenius_norm() * Hp.frobenius_norm();
    if (scale == 0.0) continue;
    worst = std::max(worst, commutator(G, Hp).frobenius_norm() / scale);
  }
  return worst;
}

SplitResult split_evolution(const DrivenHamiltonian& dh, double t_end, int steps, double tolerance) {
  EvolutionOptions options;
  options.steps = steps;
  options.t_end = t_end;
  SplitResult out;
  options.part = GeneratorPart::Full;
  out.full = *evolve_time_ordered(dh, options).unitary;
  options.part = GeneratorPart::Geometric;
  out.geometric = *evolve_time_ordered(dh, options).unitary;
  options.part = GeneratorPart::Dynamic;
  out.dynamic = *evolve_time_ordered(dh, options).unitary;
  out.commutator_report = commutator_report(dh, t_end);
  out.factorization_defect = (out.full - out.geometric * out.dynamic).norm();
  out.asserted = out.commutator_report <= 1e-10;
  if (out.asserted && out.factorization_defect > tolerance) {
    throw NumericalError("commuting generators but factorization defect " +
                         std::to_string(out.factorization_defect) + " exceeds " + std::to_string(tolerance));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Heisenberg picture

LinearOperator heisenberg_derivative(const LinearOperator& fhat, const DrivenHamiltonian& dh, double t) {
  if (fhat.dimension() != dh.grid().size()) throw ModelError("operator dimension differs from the grid size");
  return kI * commutator(dh.hamiltonian(t), fhat);
}

HeisenbergDerivative heisenberg_derivative(const PolynomialObservable& f, const DrivenHamiltonian& dh, double t) {
  const std::vector<double> sigma = dh.path().position(t);
  const std::vector<double> v = dh.path().velocity(t);
  const LinearOperator fhat = quantize_polynomial(f, dh.cover(), dh.grid(), t, sigma, dh.ordering());

  PolynomialObservable rate = f.coefficient_derivative(time_var());
  for (int l = 0; l < f.parameter_dim(); ++l) {
    rate += Expr::constant(v[l]) * f.coefficient_derivative(sigma_var(l));
  }
  LinearOperator explicit_part = rate.is_zero()
                                     ? LinearOperator::zero(dh.grid().size())
                                     : quantize_polynomial(rate, dh.cover(), dh.grid(), t, sigma, dh.ordering());
  return {heisenberg_derivative(fhat, dh, t), std::move(explicit_part)};
}

// ---------------------------------------------------------------------------
// Classical flow

std::vector<ClassicalState> classical_hamilton_flow(const DrivenHamiltonian& dh, const ClassicalState& initial,
                                                    double t_end, int steps) {
  check_steps(steps);
  const int m = dh.bundle().m;
  const int n = dh.bundle().n;
  if (static_cast<int>(initial.q.size()) != n || static_cast<int>(initial.p.size()) != n) {
    throw ModelError("classical state needs " + std::to_string(n) + " positions and momenta");
  }

  // H_chi = base + v^l piece_l, with v = dchi/dt.
  PolynomialObservable base = dh.dynamic();
  std::vector<PolynomialObservable> pieces(m, PolynomialObservable(m, n));
  for (int k = 0; k < n; ++k) {
    base.add_term({k}, dh.bundle().time_drift[k]);
    for (int l = 0; l < m; ++l) pieces[l].add_term({k}, dh.bundle().sigma_connection[k][l]);
  }
  struct Partials {
    std::vector<PolynomialObservable> dp;
    std::vector<PolynomialObservable> dq;
  };
  const auto partials = [n](const PolynomialObservable& f) {
    Partials out;
    for (int k = 0; k < n; ++k) {
      out.dp.push_back(f.momentum_derivative(k));
      out.dq.push_back(f.coefficient_derivative(q_var(k)));
    }
    return out;
  };
  const Partials base_partials = partials(base);
  std::vector<Partials> piece_partials;
  for (const auto& piece : pieces) piece_partials.push_back(partials(piece));

  const auto rhs = [&](double t, const std::vector<double>& q, const std::vector<double>& p) {
    const PhasePoint point{t, dh.path().position(t), q, p};
    const std::vector<double> v = dh.path().velocity(t);
    std::vector<double> out(2 * n);
    for (int k = 0; k < n; ++k) {
      double qdot = base_partials.dp[k].evaluate(point);
      double pdot = -base_partials.dq[k].evaluate(point);
      for (int l = 0; l < m; ++l) {
        if (v[l] == 0.0) continue;
        qdot += v[l] * piece_partials[l].dp[k].evaluate(point);
        pdot -= v[l] * piece_partials[l].dq[k].evaluate(point);
      }
      out[k] = qdot;
      out[n + k] = pdot;
    }
    return out;
  };

  const double t0 = initial.t;
  const double dt = (t_end - t0) / steps;
  std::vector<ClassicalState> trajectory{initial};
  trajectory.reserve(steps + 1);
  std::vector<double> y(2 * n);
  std::copy(initial.q.begin(), initial.q.end(), y.begin());
  std::copy(initial.p.begin(), initial.p.end(), y.begin() + n);

  const auto eval = [&](double t, const std::vector<double>& state) {
    return rhs(t, {state.begin(), state.begin() + n}, {state.begin() + n, state.end()});
  };
  const auto axpy = [](const std::vector<double>& a, double s, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
    return out;
  };

  for (int j = 0; j < steps; ++j) {
    const double t = t0 + j * dt;
    std::vector<double> k1, k2, k3, k4;
    try {
      k1 = eval(t, y);
      k2 = eval(t + 0.5 * dt, axpy(y, 0.5 * dt, k1));
      k3 = eval(t + 0.5 * dt, axpy(y, 0.5 * dt, k2));
      k4 = eval(t + dt, axpy(y, dt, k3));
    } catch (const EvalError& e) {
      throw NumericalError("classical flow became non-finite at t = " + std::to_string(t) + " (" + e.what() + ")");
    }
    for (int i = 0; i < 2 * n; ++i) {
      y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(y[i])) {
        throw NumericalError("classical flow became non-finite at t = " + std::to_string(t + dt));
      }
    }
    trajectory.push_back(ClassicalState{{y.begin(), y.begin() + n}, {y.begin() + n, y.end()}, t0 + (j + 1) * dt});
  }
  return trajectory;
}

ParameterPath reparametrize_path(const ParameterPath& path, const Expr& warp) { return path.warped(warp); }

}  // namespace fqu
