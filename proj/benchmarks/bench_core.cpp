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

#include <benchmark/benchmark.h>

#include <vector>

#include "fqu/coordinates.hpp"
#include "fqu/evolve.hpp"
#include "fqu/propagator.hpp"
#include "fqu/quantize.hpp"

namespace {

using namespace fqu;

const std::vector<double> kSigma{0.2};

PolynomialObservable oscillator() {
  auto h = PolynomialObservable::monomial(1, 1, {0, 0}, Expr::constant(0.5));
  h.add_term({}, parse_expr("0.5*(q1 - s1)^2", coefficient_variables(1, 1)));
  return h;
}

void BM_ParseExpr(benchmark::State& state) {
  const auto vars = coefficient_variables(2, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_expr("sin(q1*s2) + exp(-0.5*(q2 - t)^2) * bump(q1; 0, 2) / (1 + s1^2)", vars));
  }
}
BENCHMARK(BM_ParseExpr);

void BM_CompiledEval(benchmark::State& state) {
  const auto vars = coefficient_variables(1, 1);
  const CompiledExpr f(parse_expr("sin(q1*s1) + exp(-0.5*(q1 - t)^2)", vars), vars);
  const FiberGrid grid(1, static_cast<int>(state.range(0)), 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_field(f, grid, 0.3, kSigma));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CompiledEval)->Arg(512)->Arg(4096);

void BM_QuantizeAffine(benchmark::State& state) {
  const auto vars = coefficient_variables(1, 1);
  PolynomialObservable f(1, 1);
  f.add_term({0}, parse_expr("1 + 0.3*sin(q1)", vars));
  f.add_term({}, parse_expr("q1^2", vars));
  const FiberGrid grid(1, static_cast<int>(state.range(0)), 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(quantize_affine(f, grid, 0.0, kSigma));
}
BENCHMARK(BM_QuantizeAffine)->Arg(512)->Arg(4096);

void BM_PolynomialAssemble(benchmark::State& state) {
  const FiberGrid grid(1, static_cast<int>(state.range(0)), 5.0);
  const PolynomialQuantizer q(oscillator(), BumpCover::uniform(1, 3, -5.0, 5.0, 1.0), grid);
  for (auto _ : state) benchmark::DoNotOptimize(q.assemble(0.0, kSigma));
}
BENCHMARK(BM_PolynomialAssemble)->Arg(512);

void BM_UnitaryExponential(benchmark::State& state) {
  const FiberGrid grid(1, static_cast<int>(state.range(0)), 5.0);
  const DenseMatrix H =
      quantize_polynomial(oscillator(), BumpCover::single_chart(1, -5.0, 5.0), grid, 0.0, kSigma).dense();
  for (auto _ : state) benchmark::DoNotOptimize(unitary_exponential(H, 1e-3));
}
BENCHMARK(BM_UnitaryExponential)->Arg(32)->Arg(64)->Arg(128);

void BM_KrylovStep(benchmark::State& state) {
  const FiberGrid grid(1, static_cast<int>(state.range(0)), 5.0);
  const LinearOperator H = quantize_polynomial(oscillator(), BumpCover::single_chart(1, -5.0, 5.0), grid, 0.0, kSigma);
  const std::vector<double> c{0.3};
  const std::vector<double> k{0.0};
  const StateVector psi = WaveSection::gaussian(grid, c, 1.0, k).amplitudes;
  for (auto _ : state) benchmark::DoNotOptimize(krylov_exponential(H.matrix(), 1e-3, psi));
}
BENCHMARK(BM_KrylovStep)->Arg(512)->Arg(2048);

void BM_GeometricFactor(benchmark::State& state) {
  BundleModel bundle = BundleModel::flat(2, 1);
  bundle.sigma_connection[0][0] = Expr::constant(1.0);
  bundle.sigma_connection[0][1] = parse_expr("q1", coefficient_variables(2, 1));
  const auto t = parameter_variables(0);
  const auto path = ParameterPath::closed_form({parse_expr("cos(t)", t), parse_expr("sin(t)", t)}, 0.0,
                                               2.0 * 3.141592653589793, true);
  const DrivenHamiltonian dh(bundle, path, PolynomialObservable(2, 1), BumpCover::single_chart(1, -4.0, 4.0),
                             FiberGrid(1, 64, 4.0));
  const int segments = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(geometric_factor(dh, path.t1(), segments));
  state.SetItemsProcessed(state.iterations() * segments);
}
BENCHMARK(BM_GeometricFactor)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
