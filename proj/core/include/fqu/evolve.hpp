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

// Driven quantum evolution along a parameter path. The Hamiltonian splits as
//
//   H_chi(t) = G(t) + H'(t),
//   G(t)  = quantize(lambda^k_l(t, chi, q) dchi^l/dt p_k),
//   H'(t) = quantize(drift^k p_k) + quantize(H_Lambda),
//
// everything evaluated at s = chi(t).

#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "fqu/algebra.hpp"
#include "fqu/bundle.hpp"
#include "fqu/quantize.hpp"

namespace fqu {

class DrivenHamiltonian {
 public:
  /// Throws ModelError on inconsistent dimensions.
  DrivenHamiltonian(BundleModel bundle, ParameterPath path, PolynomialObservable dynamic, BumpCover cover,
                    FiberGrid grid, OrderingRule ordering = OrderingRule::Symmetric);

  const BundleModel& bundle() const noexcept { return bundle_; }
  const ParameterPath& path() const noexcept { return path_; }
  const PolynomialObservable& dynamic() const noexcept { return dynamic_; }
  const BumpCover& cover() const noexcept { return cover_; }
  const FiberGrid& grid() const noexcept { return grid_; }
  OrderingRule ordering() const noexcept { return ordering_; }

  /// quantize(lambda^k_l(t, s, q) ds^l p_k) at (t, s). With ds = dchi/dt this is G(t).
  LinearOperator transport_generator(double t, std::span<const double> sigma, std::span<const double> dsigma) const;
  LinearOperator geometric_generator(double t) const;
  LinearOperator dynamic_operator(double t) const;
  LinearOperator hamiltonian(double t) const;

  /// Classical H_chi as a polynomial observable in (t, s, q, p); evaluate it with s = chi(t).
  PolynomialObservable classical_hamiltonian(double t) const;

  DrivenHamiltonian with_path(ParameterPath path) const;
  DrivenHamiltonian with_grid(FiberGrid grid) const;

 private:
  BundleModel bundle_;
  ParameterPath path_;
  PolynomialObservable dynamic_;
  BumpCover cover_;
  FiberGrid grid_;
  OrderingRule ordering_;
  std::vector<std::vector<CompiledExpr>> lambda_;  // [k][l]
  std::vector<CompiledExpr> drift_;
  bool has_drift_ = false;
  std::shared_ptr<const PolynomialQuantizer> quantizer_;
};

/// Which generator a time-ordered product exponentiates.
enum class GeneratorPart { Full, Geometric, Dynamic };

struct EvolutionOptions {
  int steps = 1000;
  /// Defaults to the end of the path span.
  std::optional<double> t_end;
  GeneratorPart part = GeneratorPart::Full;
  /// Build the dense unitary. Without it only the initial state is propagated.
  bool compute_unitary = true;
  std::optional<WaveSection> initial;
  bool emit_trajectory = false;
  /// Trajectory rows are written every `sample_every` steps (and at the end).
  int sample_every = 1;
};

struct TrajectorySample {
  double t = 0.0;
  std::vector<double> sigma;
  std::vector<double> dsigma_dt;
  std::vector<double> exp_q;
  std::vector<double> exp_p;
  double norm = 0.0;
  double phase_total = 0.0;
  double phase_geometric = 0.0;
  double phase_total_unwrapped = 0.0;
  double phase_geometric_unwrapped = 0.0;
  double unitarity_defect = 0.0;
};

struct EvolutionResult {
  std::optional<DenseMatrix> unitary;
  std::optional<WaveSection> final_state;
  std::vector<TrajectorySample> trajectory;
  /// ||U^+U - I||_F for unitaries; max | |psi|^2 - |psi0|^2 | / |psi0|^2 for states.
  double unitarity_defect = 0.0;
  double max_hermiticity_defect = 0.0;
  /// arg<psi0|psi(t1)> and arg<psi0|U_geo psi0>; zero without an initial state.
  double phase_total = 0.0;
  double phase_geometric = 0.0;
  double phase_total_unwrapped = 0.0;
  double phase_geometric_unwrapped = 0.0;
  int steps = 0;
};

/// U = prod_j exp(-i dt H(t_{j-1/2})) (midpoint Magnus). Throws NumericalError
/// when a step operator has hermiticity defect above 1e-10.
EvolutionResult evolve_time_ordered(const DrivenHamiltonian& dh, const EvolutionOptions& options);

/// Path-ordered product over `segments` segments of exp(-i quantize(lambda^k_l ds^l p_k))
/// with ds = chi(t_{j+1}) - chi(t_j), evaluated at the segment midpoint.
DenseMatrix geometric_factor(const DrivenHamiltonian& dh, double t_end, int segments);
/// Same product applied to one section.
WaveSection geometric_transport(const DrivenHamiltonian& dh, const WaveSection& psi, double t_end, int segments);

struct SplitResult {
  DenseMatrix full;
  DenseMatrix geometric;
  DenseMatrix dynamic;
  /// max over 32 times of ||[G, H']||_F / (||G||_F ||H'||_F)
  double commutator_report = 0.0;
  /// ||U - U_geo U_dyn||_F
  double factorization_defect = 0.0;
  /// True when the commutator report was small enough to assert the factorization.
  bool asserted = false;
};

/// Throws NumericalError if the factorization is asserted and the defect exceeds `tolerance`.
SplitResult split_evolution(const DrivenHamiltonian& dh, double t_end, int steps, double tolerance = 1e-8);

/// max over 32 sample times of the normalized commutator of G and H'.
double commutator_report(const DrivenHamiltonian& dh, double t_end);

struct HeisenbergDerivative {
  LinearOperator commutator_part;  // i[H_chi, f^]
  LinearOperator explicit_part;    // quantization of d_t f + dchi^l/dt d_l f
};

/// i[H_chi(t), f^].
LinearOperator heisenberg_derivative(const LinearOperator& fhat, const DrivenHamiltonian& dh, double t);
/// Both parts of the Heisenberg derivative of a classical observable.
HeisenbergDerivative heisenberg_derivative(const PolynomialObservable& f, const DrivenHamiltonian& dh, double t);

struct ClassicalState {
  std::vector<double> q;
  std::vector<double> p;
  double t = 0.0;
};

/// RK4 for dq^k/dt = dH_chi/dp_k, dp_k/dt = -dH_chi/dq^k. Returns steps + 1
/// states including the initial one. Throws NumericalError on a non-finite state.
std::vector<ClassicalState> classical_hamilton_flow(const DrivenHamiltonian& dh, const ClassicalState& initial,
                                                    double t_end, int steps);

/// chi o warp; see ParameterPath::warped.
ParameterPath reparametrize_path(const ParameterPath& path, const Expr& warp);

/// Step-doubling study of the geometric factor at S, 2S and 4S segments.
struct ConvergenceReport {
  int base_segments = 0;
  double coarse_difference = 0.0;  // ||U_S - U_2S||_F
  double fine_difference = 0.0;    // ||U_2S - U_4S||_F
  double ratio = 0.0;
  /// ||R_fine - R_coarse||_F for the Richardson combinations (4 U_2k - U_k) / 3.
  double richardson_stability = 0.0;
  /// ||R_fine - I||_F
  double holonomy_norm = 0.0;
  DenseMatrix richardson;
};

ConvergenceReport geometric_convergence(const DrivenHamiltonian& dh, int base_segments);

/// Wraps an angle into (-pi, pi].
double wrap_phase(double angle);

}  // namespace fqu
