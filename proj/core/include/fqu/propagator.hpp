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

// Exponentials exp(-i dt H) of Hermitian operators.

#pragma once

#include "fqu/quantize.hpp"

namespace fqu {

/// exp(-i dt H) through a Hermitian eigendecomposition. Only the lower
/// triangle of H is read, so the result is unitary to rounding.
DenseMatrix unitary_exponential(const DenseMatrix& hamiltonian, double dt);

/// exp(-i dt H) v by Lanczos with full reorthogonalization. The step is split
/// recursively until the a posteriori error estimate is below tol * |v|.
StateVector krylov_exponential(const SparseMatrix& hamiltonian, double dt, const StateVector& v,
                               double tol = 1e-14, int max_dimension = 48);

}  // namespace fqu
