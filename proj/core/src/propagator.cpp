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

#include "fqu/propagator.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <optional>

#include "fqu/error.hpp"

namespace fqu {
namespace {

constexpr int kMaxSplitDepth = 24;

// One Lanczos attempt; empty when the error estimate misses the tolerance.
std::optional<StateVector> lanczos_step(const SparseMatrix& H, double dt, const StateVector& v, double tol,
                                        int max_dimension) {
  const double beta0 = v.norm();
  if (beta0 == 0.0) return StateVector::Zero(v.size());
  const int max_dim = static_cast<int>(std::min<Eigen::Index>(max_dimension, v.size()));

  DenseMatrix basis(v.size(), max_dim + 1);
  Eigen::VectorXd alpha(max_dim);
  Eigen::VectorXd beta(max_dim);
  basis.col(0) = v / beta0;

  for (int j = 0; j < max_dim; ++j) {
    StateVector w = H * basis.col(j);
    alpha[j] = basis.col(j).dot(w).real();
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) w -= basis.col(i).dot(w) * basis.col(i);
    }
    beta[j] = w.norm();
    const int dim = j + 1;

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < dim) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::MatrixXd& Q = es.eigenvectors();
    Eigen::VectorXcd phases(dim);
    for (int i = 0; i < dim; ++i) phases[i] = std::exp(Complex(0.0, -dt * es.eigenvalues()[i]));
    const Eigen::VectorXcd coeffs = Q.cast<Complex>() * phases.cwiseProduct(Q.row(0).transpose().cast<Complex>());

    const bool breakdown = beta[j] <= 1e-14 * std::max(1.0, std::abs(alpha[j]));
    const double estimate = beta[j] * std::abs(coeffs[dim - 1]);
    if (breakdown || estimate <= tol) {
      return StateVector(beta0 * (basis.leftCols(dim) * coeffs));
    }
    basis.col(j + 1) = w / beta[j];
  }
  return std::nullopt;
}

StateVector split_step(const SparseMatrix& H, double dt, const StateVector& v, double tol, int max_dimension,
                       int depth) {
  if (auto out = lanczos_step(H, dt, v, tol, max_dimension)) return *out;
  if (depth >= kMaxSplitDepth) throw NumericalError("Krylov exponential failed to converge");
  const StateVector half = split_step(H, 0.5 * dt, v, 0.5 * tol, max_dimension, depth + 1);
  return split_step(H, 0.5 * dt, half, 0.5 * tol, max_dimension, depth + 1);
}

}  // namespace

DenseMatrix unitary_exponential(const DenseMatrix& hamiltonian, double dt) {
  if (hamiltonian.rows() != hamiltonian.cols()) throw ModelError("exponential of a non-square matrix");
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(hamiltonian);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
  Eigen::VectorXcd phases(hamiltonian.rows());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases[i] = std::exp(Complex(0.0, -dt * es.eigenvalues()[i]));
  const DenseMatrix& V = es.eigenvectors();
  const DenseMatrix E = V * phases.asDiagonal() * V.adjoint();
  // One Newton-Schulz step towards the nearest unitary removes the basis roundoff.
  const DenseMatrix gram = E.adjoint() * E;
  return E * (1.5 * DenseMatrix::Identity(E.rows(), E.cols()) - 0.5 * gram);
}

StateVector krylov_exponential(const SparseMatrix& hamiltonian, double dt, const StateVector& v, double tol,
                               int max_dimension) {
  if (hamiltonian.rows() != v.size()) throw ModelError("operator and vector dimensions differ");
  const double scale = v.norm();
  if (scale == 0.0) return v;
  return split_step(hamiltonian, dt, v, tol * scale, max_dimension, 0);
}

}  // namespace fqu
