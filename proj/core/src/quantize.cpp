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

#include "fqu/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "fqu/coordinates.hpp"
#include "fqu/error.hpp"

namespace fqu {
namespace {

constexpr Complex kI{0.0, 1.0};

using Triplet = Eigen::Triplet<Complex>;

Eigen::Index axis_stride(const FiberGrid& grid, int axis) {
  Eigen::Index stride = 1;
  for (int a = grid.dimension() - 1; a > axis; --a) stride *= grid.points();
  return stride;
}

// Flat index of the periodic neighbour at offset +-1 along `axis`.
Eigen::Index neighbour(const FiberGrid& grid, Eigen::Index flat, int axis, int offset) {
  const Eigen::Index stride = axis_stride(grid, axis);
  const int j = grid.axis_index(flat, axis);
  const int N = grid.points();
  const int wrapped = ((j + offset) % N + N) % N;
  return flat + static_cast<Eigen::Index>(wrapped - j) * stride;
}

void check_axis(const FiberGrid& grid, int axis) {
  if (axis < 0 || axis >= grid.dimension()) {
    throw ModelError("axis " + std::to_string(axis) + " out of range for a " +
                     std::to_string(grid.dimension()) + "-dimensional grid");
  }
}

void check_affine_input(const PolynomialObservable& f, const FiberGrid& grid, std::span<const double> sigma) {
  if (!is_affine(f)) throw ModelError("quantize_affine requires an observable of degree <= 1");
  if (f.fiber_dim() != grid.dimension()) throw ModelError("observable and grid fiber dimensions differ");
  if (static_cast<int>(sigma.size()) != f.parameter_dim()) {
    throw ModelError("sigma has " + std::to_string(sigma.size()) + " components, expected " +
                     std::to_string(f.parameter_dim()));
  }
}

// Slot vector [t, s..., q...] with the q part left for the caller.
std::vector<double> slot_prefix(double t, std::span<const double> sigma, int n) {
  std::vector<double> slots(1 + sigma.size() + n, 0.0);
  slots[0] = t;
  std::copy(sigma.begin(), sigma.end(), slots.begin() + 1);
  return slots;
}

Eigen::VectorXd sample_compiled(const CompiledExpr& field, const FiberGrid& grid, std::vector<double> slots) {
  const std::size_t q0 = slots.size() - grid.dimension();
  Eigen::VectorXd out(grid.size());
  if (field.is_constant()) {
    out.setConstant(field(slots));
    return out;
  }
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    for (int a = 0; a < grid.dimension(); ++a) slots[q0 + a] = grid.coordinate(grid.axis_index(j, a));
    out[j] = field(slots);
  }
  return out;
}

LinearOperator factor_product(std::span<const LinearOperator> factors, std::span<const int> order) {
  LinearOperator out = factors[order[0]];
  for (std::size_t i = 1; i < order.size(); ++i) out = out * factors[order[i]];
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// FiberGrid

FiberGrid::FiberGrid(int n, int points, double half_width) : n_(n), points_(points), half_width_(half_width) {
  if (n != 1 && n != 2) throw ModelError("fiber grids support n = 1 or 2, got " + std::to_string(n));
  if (points < 8) throw ModelError("grid needs at least 8 points per axis, got " + std::to_string(points));
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ModelError("grid half width must be positive");
}

double FiberGrid::cell_volume() const noexcept { return std::pow(spacing(), n_); }

Eigen::Index FiberGrid::size() const noexcept {
  Eigen::Index s = 1;
  for (int a = 0; a < n_; ++a) s *= points_;
  return s;
}

int FiberGrid::axis_index(Eigen::Index flat, int axis) const noexcept {
  Eigen::Index stride = 1;
  for (int a = n_ - 1; a > axis; --a) stride *= points_;
  return static_cast<int>((flat / stride) % points_);
}

std::vector<double> FiberGrid::point(Eigen::Index flat) const {
  std::vector<double> q(n_);
  for (int a = 0; a < n_; ++a) q[a] = coordinate(axis_index(flat, a));
  return q;
}

// ---------------------------------------------------------------------------
// WaveSection

WaveSection WaveSection::gaussian(const FiberGrid& grid, std::span<const double> center, double width,
                                  std::span<const double> kick) {
  const int n = grid.dimension();
  if (static_cast<int>(center.size()) != n || static_cast<int>(kick.size()) != n) {
    throw ModelError("gaussian center and kick need " + std::to_string(n) + " components");
  }
  if (!(width > 0.0)) throw ModelError("gaussian width must be positive");
  const double norm = std::pow(std::numbers::pi * width * width, -0.25 * n);
  StateVector amps(grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    double re = 0.0;
    double phase = 0.0;
    for (int a = 0; a < n; ++a) {
      const double q = grid.coordinate(grid.axis_index(j, a));
      const double d = q - center[a];
      re -= d * d / (2.0 * width * width);
      phase += kick[a] * q;
    }
    amps[j] = norm * std::exp(Complex(re, phase));
  }
  return WaveSection{grid, std::move(amps), 0.0, {}};
}

double WaveSection::mass_fraction_inside(double fraction) const {
  const double bound = fraction * grid.half_width();
  double inside = 0.0;
  double total = 0.0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const double w = std::norm(amplitudes[j]);
    total += w;
    bool in = true;
    for (int a = 0; a < grid.dimension(); ++a) {
      if (std::abs(grid.coordinate(grid.axis_index(j, a))) > bound) in = false;
    }
    if (in) inside += w;
  }
  return total > 0.0 ? inside / total : 1.0;
}

Complex inner_product(const WaveSection& rho, const WaveSection& rho_prime) {
  if (!(rho.grid == rho_prime.grid)) throw ModelError("inner product of sections on different grids");
  // dot() conjugates its first argument.
  return rho.grid.cell_volume() * rho_prime.amplitudes.dot(rho.amplitudes);
}

// ---------------------------------------------------------------------------
// LinearOperator

LinearOperator::LinearOperator(SparseMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw ModelError("linear operators must be square");
  matrix_.makeCompressed();
}

LinearOperator LinearOperator::zero(Eigen::Index dim) { return LinearOperator(SparseMatrix(dim, dim)); }

LinearOperator LinearOperator::identity(Eigen::Index dim) {
  SparseMatrix m(dim, dim);
  m.setIdentity();
  return LinearOperator(std::move(m));
}

LinearOperator LinearOperator::diagonal(const Eigen::VectorXcd& values) {
  std::vector<Triplet> triplets;
  triplets.reserve(values.size());
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (values[j] != Complex(0.0)) triplets.emplace_back(j, j, values[j]);
  }
  SparseMatrix m(values.size(), values.size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return LinearOperator(std::move(m));
}

LinearOperator LinearOperator::adjoint() const { return LinearOperator(SparseMatrix(matrix_.adjoint())); }

WaveSection LinearOperator::apply(const WaveSection& v) const {
  if (v.amplitudes.size() != dimension()) throw ModelError("operator and section dimensions differ");
  return WaveSection{v.grid, matrix_ * v.amplitudes, v.time, v.sigma};
}

bool LinearOperator::identical_to(const LinearOperator& other) const {
  const SparseMatrix& a = matrix_;
  const SparseMatrix& b = other.matrix_;
  if (a.rows() != b.rows() || a.nonZeros() != b.nonZeros()) return false;
  const auto nnz = static_cast<std::size_t>(a.nonZeros());
  const auto cols = static_cast<std::size_t>(a.outerSize()) + 1;
  return std::equal(a.valuePtr(), a.valuePtr() + nnz, b.valuePtr()) &&
         std::equal(a.innerIndexPtr(), a.innerIndexPtr() + nnz, b.innerIndexPtr()) &&
         std::equal(a.outerIndexPtr(), a.outerIndexPtr() + cols, b.outerIndexPtr());
}

LinearOperator& LinearOperator::operator+=(const LinearOperator& other) {
  if (other.dimension() != dimension()) throw ModelError("operator dimensions differ");
  matrix_ = SparseMatrix(matrix_ + other.matrix_);
  matrix_.makeCompressed();
  return *this;
}

LinearOperator operator+(LinearOperator a, const LinearOperator& b) {
  a += b;
  return a;
}

LinearOperator operator-(const LinearOperator& a, const LinearOperator& b) {
  if (a.dimension() != b.dimension()) throw ModelError("operator dimensions differ");
  return LinearOperator(SparseMatrix(a.matrix_ - b.matrix_));
}

LinearOperator operator*(const LinearOperator& a, const LinearOperator& b) {
  if (a.dimension() != b.dimension()) throw ModelError("operator dimensions differ");
  return LinearOperator(SparseMatrix(a.matrix_ * b.matrix_));
}

LinearOperator operator*(Complex s, const LinearOperator& a) { return LinearOperator(SparseMatrix(s * a.matrix_)); }

LinearOperator commutator(const LinearOperator& a, const LinearOperator& b) { return a * b - b * a; }

double hermiticity_defect(const LinearOperator& op) {
  const SparseMatrix diff = op.matrix() - SparseMatrix(op.matrix().adjoint());
  return diff.norm() / std::max(1.0, op.frobenius_norm());
}

double hermiticity_defect(const DenseMatrix& op) {
  return (op - op.adjoint()).norm() / std::max(1.0, op.norm());
}

double expectation(const LinearOperator& op, const WaveSection& psi) {
  const Complex num = inner_product(op.apply(psi), psi);
  const Complex den = inner_product(psi, psi);
  if (den.real() <= 0.0) throw NumericalError("expectation of the zero section");
  return num.real() / den.real();
}

// ---------------------------------------------------------------------------
// Assembly

LinearOperator derivative_matrix(const FiberGrid& grid, int axis) {
  check_axis(grid, axis);
  const double c = 1.0 / (2.0 * grid.spacing());
  std::vector<Triplet> triplets;
  triplets.reserve(2 * grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    triplets.emplace_back(j, neighbour(grid, j, axis, +1), c);
    triplets.emplace_back(j, neighbour(grid, j, axis, -1), -c);
  }
  SparseMatrix m(grid.size(), grid.size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return LinearOperator(std::move(m));
}

LinearOperator position_operator(const FiberGrid& grid, int axis) {
  check_axis(grid, axis);
  Eigen::VectorXcd q(grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) q[j] = grid.coordinate(grid.axis_index(j, axis));
  return LinearOperator::diagonal(q);
}

Eigen::VectorXd sample_field(const Expr& field, const FiberGrid& grid, double t, std::span<const double> sigma) {
  const int m = static_cast<int>(sigma.size());
  const CompiledExpr compiled(field, coefficient_variables(m, grid.dimension()));
  return sample_compiled(compiled, grid, slot_prefix(t, sigma, grid.dimension()));
}

Eigen::VectorXd sample_field(const CompiledExpr& field, const FiberGrid& grid, double t,
                             std::span<const double> sigma) {
  return sample_compiled(field, grid, slot_prefix(t, sigma, grid.dimension()));
}

LinearOperator first_order_operator(const FiberGrid& grid, std::span<const Eigen::VectorXd> vector_part,
                                    const Eigen::VectorXd& scalar_part) {
  if (static_cast<int>(vector_part.size()) != grid.dimension()) {
    throw ModelError("first-order operator needs one coefficient per fiber axis");
  }
  const double c = 1.0 / (2.0 * grid.spacing());
  std::vector<Triplet> triplets;
  triplets.reserve((2 * grid.dimension() + 1) * grid.size());
  for (int axis = 0; axis < grid.dimension(); ++axis) {
    const Eigen::VectorXd& a = vector_part[axis];
    if (a.size() != grid.size()) throw ModelError("coefficient sample count differs from the grid size");
    if (a.isZero(0.0)) continue;
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      const Eigen::Index up = neighbour(grid, j, axis, +1);
      const Eigen::Index down = neighbour(grid, j, axis, -1);
      // -(i/2) D_jl (a_j + a_l), with D_jl = +-c.
      triplets.emplace_back(j, up, -0.5 * kI * c * (a[j] + a[up]));
      triplets.emplace_back(j, down, 0.5 * kI * c * (a[j] + a[down]));
    }
  }
  if (scalar_part.size() != grid.size()) throw ModelError("coefficient sample count differs from the grid size");
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    if (scalar_part[j] != 0.0) triplets.emplace_back(j, j, scalar_part[j]);
  }
  SparseMatrix m(grid.size(), grid.size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return LinearOperator(std::move(m));
}

LinearOperator quantize_affine(const PolynomialObservable& f, const FiberGrid& grid, double t,
                               std::span<const double> sigma) {
  check_affine_input(f, grid, sigma);
  std::vector<Eigen::VectorXd> a;
  for (int k = 0; k < grid.dimension(); ++k) a.push_back(sample_field(f.coefficient({k}), grid, t, sigma));
  return first_order_operator(grid, a, sample_field(f.coefficient({}), grid, t, sigma));
}

LinearOperator quantize_affine_literal(const PolynomialObservable& f, const FiberGrid& grid, double t,
                                       std::span<const double> sigma) {
  check_affine_input(f, grid, sigma);
  LinearOperator out = LinearOperator::zero(grid.size());
  Expr divergence;
  for (int k = 0; k < grid.dimension(); ++k) {
    const Expr a = f.coefficient({k});
    const Eigen::VectorXcd samples = sample_field(a, grid, t, sigma).cast<Complex>();
    out += (-kI) * (LinearOperator::diagonal(samples) * derivative_matrix(grid, k));
    divergence = divergence + diff(a, q_var(k));
  }
  Eigen::VectorXcd scalar = sample_field(f.coefficient({}), grid, t, sigma).cast<Complex>();
  scalar -= 0.5 * kI * sample_field(divergence, grid, t, sigma).cast<Complex>();
  return out + LinearOperator::diagonal(scalar);
}

// ---------------------------------------------------------------------------
// PolynomialQuantizer

PolynomialQuantizer::PolynomialQuantizer(const PolynomialObservable& f, const BumpCover& cover,
                                         const FiberGrid& grid, OrderingRule ordering)
    : grid_(grid), ordering_(ordering), m_(f.parameter_dim()), factorization_(decompose_polynomial(f, cover)) {
  if (f.fiber_dim() != grid.dimension()) throw ModelError("observable and grid fiber dimensions differ");
  const auto slots = coefficient_variables(m_, grid.dimension());
  for (const auto& term : factorization_.terms) {
    std::vector<Factor> factors;
    for (const auto& g : term) {
      Factor factor;
      for (int k = 0; k < grid.dimension(); ++k) factor.vector_part.emplace_back(g.coefficient({k}), slots);
      factor.scalar_part = CompiledExpr(g.coefficient({}), slots);
      factors.push_back(std::move(factor));
    }
    terms_.push_back(std::move(factors));
  }
}

LinearOperator PolynomialQuantizer::assemble_factor(const Factor& factor, std::span<const double> slots) const {
  const std::vector<double> prefix(slots.begin(), slots.end());
  std::vector<Eigen::VectorXd> a;
  for (const auto& c : factor.vector_part) a.push_back(sample_compiled(c, grid_, prefix));
  return first_order_operator(grid_, a, sample_compiled(factor.scalar_part, grid_, prefix));
}

LinearOperator PolynomialQuantizer::assemble(double t, std::span<const double> sigma) const {
  if (static_cast<int>(sigma.size()) != m_) throw ModelError("sigma has the wrong number of components");
  const std::vector<double> slots = slot_prefix(t, sigma, grid_.dimension());
  LinearOperator total = LinearOperator::zero(grid_.size());
  for (const auto& term : terms_) {
    std::vector<LinearOperator> ops;
    ops.reserve(term.size());
    for (const auto& factor : term) ops.push_back(assemble_factor(factor, slots));
    std::vector<int> order(ops.size());
    std::iota(order.begin(), order.end(), 0);
    switch (ordering_) {
      case OrderingRule::Left:
        total += factor_product(ops, order);
        break;
      case OrderingRule::Right:
        std::reverse(order.begin(), order.end());
        total += factor_product(ops, order);
        break;
      case OrderingRule::Symmetric: {
        LinearOperator sum = LinearOperator::zero(grid_.size());
        int count = 0;
        do {
          sum += factor_product(ops, order);
          ++count;
        } while (std::next_permutation(order.begin(), order.end()));
        total += Complex(1.0 / count) * sum;
        break;
      }
    }
  }
  return total;
}

LinearOperator quantize_polynomial(const PolynomialObservable& f, const BumpCover& cover, const FiberGrid& grid,
                                   double t, std::span<const double> sigma, OrderingRule ordering) {
  return PolynomialQuantizer(f, cover, grid, ordering).assemble(t, sigma);
}

// ---------------------------------------------------------------------------
// Symbols

double FirstOrderSymbol::max_abs(const VariableBinding& b) const {
  double out = std::abs(scalar_part.evaluate(b));
  for (const auto& v : vector_part) out = std::max(out, std::abs(v.evaluate(b)));
  return out;
}

FirstOrderSymbol symbol_of(const PolynomialObservable& f) {
  if (!is_affine(f)) throw ModelError("symbol_of requires an observable of degree <= 1");
  FirstOrderSymbol s;
  Expr divergence;
  for (int k = 0; k < f.fiber_dim(); ++k) {
    const Expr a = f.coefficient({k});
    s.vector_part.push_back(ComplexField{Expr(), -a});
    divergence = divergence + diff(a, q_var(k));
  }
  s.scalar_part = ComplexField{f.coefficient({}), Expr::constant(-0.5) * divergence};
  return s;
}

FirstOrderSymbol commutator(const FirstOrderSymbol& x, const FirstOrderSymbol& y) {
  const std::size_t n = x.vector_part.size();
  if (y.vector_part.size() != n) throw ModelError("symbols of different fiber dimension");
  FirstOrderSymbol out;
  out.vector_part.assign(n, ComplexField{});
  for (std::size_t j = 0; j < n; ++j) {
    const std::string var = q_var(static_cast<int>(j));
    for (std::size_t k = 0; k < n; ++k) {
      out.vector_part[k] = out.vector_part[k] + x.vector_part[j] * diff(y.vector_part[k], var) -
                           y.vector_part[j] * diff(x.vector_part[k], var);
    }
    out.scalar_part = out.scalar_part + x.vector_part[j] * diff(y.scalar_part, var) -
                      y.vector_part[j] * diff(x.scalar_part, var);
  }
  return out;
}

FirstOrderSymbol operator+(const FirstOrderSymbol& a, const FirstOrderSymbol& b) {
  if (a.vector_part.size() != b.vector_part.size()) throw ModelError("symbols of different fiber dimension");
  FirstOrderSymbol out;
  for (std::size_t k = 0; k < a.vector_part.size(); ++k) out.vector_part.push_back(a.vector_part[k] + b.vector_part[k]);
  out.scalar_part = a.scalar_part + b.scalar_part;
  return out;
}

FirstOrderSymbol operator*(Complex s, const FirstOrderSymbol& a) {
  FirstOrderSymbol out;
  for (const auto& v : a.vector_part) out.vector_part.push_back(s * v);
  out.scalar_part = s * a.scalar_part;
  return out;
}

}  // namespace fqu
