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

// Schroedinger representation on a periodic fiber grid. An affine observable
// f = a^k p_k + b becomes the symmetrized first-order operator
//
//   f^ = -(i/2) (A_k D_k + D_k A_k) + B,
//
// equal to -i a^k d_k - (i/2) d_k a^k + b up to O(h^2) and exactly Hermitian.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "fqu/algebra.hpp"

namespace fqu {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using DenseMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

/// Periodic grid on [-L, L)^n with N points per axis. Flat indices are
/// row-major with axis 0 slowest.
class FiberGrid {
 public:
  FiberGrid(int n, int points, double half_width);

  int dimension() const noexcept { return n_; }
  int points() const noexcept { return points_; }
  double half_width() const noexcept { return half_width_; }
  double spacing() const noexcept { return 2.0 * half_width_ / points_; }
  /// h^n, the quadrature weight of one grid point.
  double cell_volume() const noexcept;
  Eigen::Index size() const noexcept;

  double coordinate(int axis_index) const noexcept { return -half_width_ + axis_index * spacing(); }
  int axis_index(Eigen::Index flat, int axis) const noexcept;
  std::vector<double> point(Eigen::Index flat) const;

  friend bool operator==(const FiberGrid&, const FiberGrid&) = default;

 private:
  int n_;
  int points_;
  double half_width_;
};

/// Complex amplitudes on a fiber grid, stamped with (t, s).
struct WaveSection {
  FiberGrid grid;
  StateVector amplitudes;
  double time = 0.0;
  std::vector<double> sigma;

  /// (pi w^2)^(-n/4) exp(-|q - c|^2 / (2 w^2) + i kick.q)
  static WaveSection gaussian(const FiberGrid& grid, std::span<const double> center, double width,
                              std::span<const double> kick);

  /// Fraction of the mass inside fraction * [-L, L)^n.
  double mass_fraction_inside(double fraction = 0.9) const;
};

/// <rho|rho'> = h^n sum rho_j conj(rho'_j). Throws ModelError on a grid mismatch.
Complex inner_product(const WaveSection& rho, const WaveSection& rho_prime);

/// Square complex matrix over the grid index space.
class LinearOperator {
 public:
  LinearOperator() = default;
  explicit LinearOperator(SparseMatrix matrix);

  static LinearOperator zero(Eigen::Index dim);
  static LinearOperator identity(Eigen::Index dim);
  static LinearOperator diagonal(const Eigen::VectorXcd& values);

  Eigen::Index dimension() const noexcept { return matrix_.rows(); }
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  DenseMatrix dense() const { return DenseMatrix(matrix_); }

  LinearOperator adjoint() const;
  double frobenius_norm() const { return matrix_.norm(); }
  StateVector apply(const StateVector& v) const { return matrix_ * v; }
  WaveSection apply(const WaveSection& v) const;

  /// Entrywise identical matrices (same sparsity and values).
  bool identical_to(const LinearOperator& other) const;

  LinearOperator& operator+=(const LinearOperator& other);
  friend LinearOperator operator+(LinearOperator a, const LinearOperator& b);
  friend LinearOperator operator-(const LinearOperator& a, const LinearOperator& b);
  friend LinearOperator operator*(const LinearOperator& a, const LinearOperator& b);
  friend LinearOperator operator*(Complex s, const LinearOperator& a);

 private:
  SparseMatrix matrix_;
};

LinearOperator commutator(const LinearOperator& a, const LinearOperator& b);

/// ||op - op^+||_F / max(1, ||op||_F)
double hermiticity_defect(const LinearOperator& op);
double hermiticity_defect(const DenseMatrix& op);

/// Real part of <psi|A psi> / <psi|psi>.
double expectation(const LinearOperator& op, const WaveSection& psi);

/// Central difference with periodic wrap along `axis`: +1/(2h) at j+1, -1/(2h) at j-1.
LinearOperator derivative_matrix(const FiberGrid& grid, int axis);

/// Multiplication by q^axis.
LinearOperator position_operator(const FiberGrid& grid, int axis);

/// Samples a (t, s, q) field on the grid at fixed (t, s).
Eigen::VectorXd sample_field(const Expr& field, const FiberGrid& grid, double t, std::span<const double> sigma);
/// Same, for a field compiled against coefficient_variables(sigma.size(), n).
Eigen::VectorXd sample_field(const CompiledExpr& field, const FiberGrid& grid, double t,
                             std::span<const double> sigma);

/// -(i/2) sum_k (A_k D_k + D_k A_k) + B from sampled coefficients.
LinearOperator first_order_operator(const FiberGrid& grid, std::span<const Eigen::VectorXd> vector_part,
                                    const Eigen::VectorXd& scalar_part);

/// Symmetrized quantization of an affine observable at (t, s).
/// Throws ModelError for non-affine input or a sigma of the wrong length.
LinearOperator quantize_affine(const PolynomialObservable& f, const FiberGrid& grid, double t,
                               std::span<const double> sigma);

/// Literal form -i A_k D_k - (i/2) diag(d_k a^k) + B. Not Hermitian on the
/// grid; kept as an independent cross-check of quantize_affine.
LinearOperator quantize_affine_literal(const PolynomialObservable& f, const FiberGrid& grid, double t,
                                       std::span<const double> sigma);

/// How a product of affine factors is ordered.
enum class OrderingRule { Symmetric, Left, Right };

/// Quantizes a polynomial observable through its affine factorization. The
/// factorization is computed once; assemble() evaluates it at (t, s).
class PolynomialQuantizer {
 public:
  PolynomialQuantizer(const PolynomialObservable& f, const BumpCover& cover, const FiberGrid& grid,
                      OrderingRule ordering = OrderingRule::Symmetric);

  LinearOperator assemble(double t, std::span<const double> sigma) const;
  const AffineFactorization& factorization() const noexcept { return factorization_; }

 private:
  struct Factor {
    std::vector<CompiledExpr> vector_part;
    CompiledExpr scalar_part;
  };

  LinearOperator assemble_factor(const Factor& factor, std::span<const double> slots) const;

  FiberGrid grid_;
  OrderingRule ordering_;
  int m_;
  AffineFactorization factorization_;
  std::vector<std::vector<Factor>> terms_;
};

LinearOperator quantize_polynomial(const PolynomialObservable& f, const BumpCover& cover, const FiberGrid& grid,
                                   double t, std::span<const double> sigma,
                                   OrderingRule ordering = OrderingRule::Symmetric);

// ---------------------------------------------------------------------------
// Symbol calculus of first-order operators V^k d_k + w with complex
// coefficient fields, used for the exact Dirac-condition check.

struct FirstOrderSymbol {
  std::vector<ComplexField> vector_part;
  ComplexField scalar_part;

  /// Largest modulus among all coefficients at the binding.
  double max_abs(const VariableBinding& b) const;
};

/// Symbol of quantize_affine(f): V^k = -i a^k, w = -(i/2) d_k a^k + b.
FirstOrderSymbol symbol_of(const PolynomialObservable& f);

/// [X, Y] of two first-order operators; again first order.
FirstOrderSymbol commutator(const FirstOrderSymbol& x, const FirstOrderSymbol& y);

FirstOrderSymbol operator+(const FirstOrderSymbol& a, const FirstOrderSymbol& b);
FirstOrderSymbol operator*(Complex s, const FirstOrderSymbol& a);

}  // namespace fqu
