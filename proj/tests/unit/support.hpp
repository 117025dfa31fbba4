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

// Shared oracles for the unit tests.

#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fqu/expr.hpp"

namespace fqu::testing {

/// Central difference of `e` in `var` at `b`.
inline double central_difference(const Expr& e, const VariableBinding& b, const std::string& var, double h) {
  VariableBinding plus = b;
  VariableBinding minus = b;
  plus[var] += h;
  minus[var] -= h;
  return (eval(e, plus) - eval(e, minus)) / (2.0 * h);
}

/// Random trees over every primitive with arguments kept inside their
/// domains, so values stay moderate and derivatives well defined.
class TreeGenerator {
 public:
  TreeGenerator(std::vector<std::string> vars, std::uint64_t seed) : vars_(std::move(vars)), rng_(seed) {}

  Expr tree(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 15);
    switch (pick(rng_)) {
      case 0:
        return Expr::constant(uniform(-1.5, 1.5));
      case 1:
        return Expr::variable(vars_[std::uniform_int_distribution<std::size_t>(0, vars_.size() - 1)(rng_)]);
      case 2: {
        const Expr a = tree(depth - 1);
        return a + tree(depth - 1);
      }
      case 3: {
        const Expr a = tree(depth - 1);
        return a - tree(depth - 1);
      }
      case 4: {
        const Expr a = squash(tree(depth - 1));
        return a * squash(tree(depth - 1));
      }
      case 5: {
        const Expr a = tree(depth - 1);
        return a / (Expr::constant(1.0) + pow(squash(tree(depth - 1)), 2));
      }
      case 6:
        return -tree(depth - 1);
      case 7:
        return pow(squash(tree(depth - 1)), std::uniform_int_distribution<int>(2, 3)(rng_));
      case 8:
        return pow(Expr::constant(1.5) + squash(tree(depth - 1)), -2);
      case 9:
        return sin(tree(depth - 1));
      case 10:
        return cos(tree(depth - 1));
      case 11:
        return exp(squash(tree(depth - 1)));
      case 12:
        return tanh(tree(depth - 1));
      case 13:
        return sqrt(Expr::constant(1.0) + pow(squash(tree(depth - 1)), 2));
      case 14:
        return bump(squash(tree(depth - 1)), Expr::constant(0.0), Expr::constant(1.5));
      default:
        return root(Expr::constant(1.0) + pow(squash(tree(depth - 1)), 2), 3);
    }
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  VariableBinding binding(double radius) {
    VariableBinding b;
    for (const auto& v : vars_) b[v] = uniform(-radius, radius);
    return b;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  static Expr squash(const Expr& e) { return tanh(e); }

  std::vector<std::string> vars_;
  std::mt19937_64 rng_;
};

}  // namespace fqu::testing
