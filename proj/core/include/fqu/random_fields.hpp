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

// Seeded generators of smooth random coefficient fields and observables for
// property checks.

#pragma once

#include <cstdint>
#include <random>

#include "fqu/algebra.hpp"

namespace fqu {

class RandomFields {
 public:
  RandomFields(int m, int n, std::uint64_t seed);

  /// Smooth, everywhere finite field in (t, s, q) of at most `depth` levels.
  Expr field(int depth = 3);
  /// a^k p_k + b with random fields.
  PolynomialObservable affine(int depth = 3);
  /// Random terms of every degree up to `degree`, the top degree always present.
  PolynomialObservable polynomial(int degree, int depth = 2);
  /// Point with all coordinates uniform in [-radius, radius].
  PhasePoint point(double radius = 1.0);
  double uniform(double lo, double hi);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  int m_;
  int n_;
  std::mt19937_64 engine_;
};

}  // namespace fqu
