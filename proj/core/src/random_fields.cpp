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

#include "fqu/random_fields.hpp"

#include <cmath>

#include "fqu/coordinates.hpp"

namespace fqu {

RandomFields::RandomFields(int m, int n, std::uint64_t seed) : m_(m), n_(n), engine_(seed) {}

double RandomFields::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

Expr RandomFields::field(int depth) {
  const auto vars = coefficient_variables(m_, n_);
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 8);
  switch (pick(engine_)) {
    case 0:
      return Expr::constant(std::round(uniform(-2.0, 2.0) * 8.0) / 8.0);
    case 1:
      return Expr::variable(vars[std::uniform_int_distribution<std::size_t>(0, vars.size() - 1)(engine_)]);
    case 2:
      {
        const Expr a = field(depth - 1);
        return a + field(depth - 1);
      }
    case 3:
      {
        const Expr a = field(depth - 1);
        return a - field(depth - 1);
      }
    case 4:
      {
        const Expr a = field(depth - 1);
        return a * field(depth - 1);
      }
    case 5:
      return sin(field(depth - 1));
    case 6:
      return cos(field(depth - 1));
    case 7:
      return tanh(field(depth - 1));
    default:
      return pow(field(depth - 1), 2);
  }
}

PolynomialObservable RandomFields::affine(int depth) {
  PolynomialObservable f(m_, n_);
  for (int k = 0; k < n_; ++k) f.add_term({k}, field(depth));
  f.add_term({}, field(depth));
  return f;
}

PolynomialObservable RandomFields::polynomial(int degree, int depth) {
  PolynomialObservable f(m_, n_);
  std::uniform_int_distribution<int> axis(0, n_ - 1);
  for (int d = 0; d <= degree; ++d) {
    MultiIndex index;
    for (int i = 0; i < d; ++i) index.push_back(axis(engine_));
    Expr coeff = field(depth);
    if (d == degree && coeff.is_zero()) coeff = Expr::constant(1.0);
    f.add_term(index, coeff);
  }
  if (f.degree() < degree) f.add_term(MultiIndex(degree, 0), Expr::constant(1.0));
  return f;
}

PhasePoint RandomFields::point(double radius) {
  PhasePoint p;
  p.t = uniform(-radius, radius);
  for (int l = 0; l < m_; ++l) p.sigma.push_back(uniform(-radius, radius));
  for (int k = 0; k < n_; ++k) p.q.push_back(uniform(-radius, radius));
  for (int k = 0; k < n_; ++k) p.p.push_back(uniform(-radius, radius));
  return p;
}

}  // namespace fqu
