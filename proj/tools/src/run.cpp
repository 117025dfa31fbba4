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

#include "fqu/cli/run.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

#include "fqu/error.hpp"
#include "fqu/evolve.hpp"

namespace fqu::cli {
namespace {

using nlohmann::json;

// Re-throws a library error with the stage name prefixed, keeping its category.
template <typename F>
auto staged(const char* stage, F&& body) {
  try {
    return body();
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(stage) + ": " + e.what());
  } catch (const EvalError& e) {
    throw NumericalError(std::string(stage) + ": " + e.what());
  } catch (const CoverError& e) {
    throw CoverError(std::string(stage) + ": " + e.what());
  } catch (const ScenarioError&) {
    throw;
  } catch (const Error& e) {
    throw ModelError(std::string(stage) + ": " + e.what());
  }
}

double unitarity(const DenseMatrix& U) { return (U.adjoint() * U - DenseMatrix::Identity(U.rows(), U.cols())).norm(); }

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_header(int m, int n) {
  std::string h = "t";
  for (int l = 1; l <= m; ++l) h += ",sigma_" + std::to_string(l);
  for (int l = 1; l <= m; ++l) h += ",dsigma_dt_" + std::to_string(l);
  for (int k = 1; k <= n; ++k) h += ",exp_q_" + std::to_string(k);
  for (int k = 1; k <= n; ++k) h += ",exp_p_" + std::to_string(k);
  return h + ",norm,phase_total,phase_geometric,unitarity_defect,phase_total_unwrapped,phase_geometric_unwrapped\n";
}

void write_csv(const std::filesystem::path& file, int m, int n, const std::vector<TrajectorySample>& rows) {
  std::ofstream out(file);
  if (!out) throw ModelError("cannot write " + file.string());
  out << csv_header(m, n);
  for (const auto& r : rows) {
    std::string line = number(r.t);
    for (double v : r.sigma) line += "," + number(v);
    for (double v : r.dsigma_dt) line += "," + number(v);
    for (double v : r.exp_q) line += "," + number(v);
    for (double v : r.exp_p) line += "," + number(v);
    for (double v : {r.norm, r.phase_total, r.phase_geometric, r.unitarity_defect, r.phase_total_unwrapped,
                     r.phase_geometric_unwrapped}) {
      line += "," + number(v);
    }
    out << line << '\n';
  }
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v, auto&& convert) {
  j[key] = v ? convert(*v) : json(nullptr);
}

json to_json(const Check& c) {
  return {{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"limit", c.limit}, {"passed", c.passed}};
}

Check check_from(const json& j) {
  return Check{j.at("name").get<std::string>(), j.at("value").get<double>(), j.at("relation").get<std::string>(),
               j.at("limit").get<double>(), j.at("passed").get<bool>()};
}

template <typename T, typename F>
std::optional<T> get_optional(const json& j, const char* key, F&& convert) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return convert(*it);
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char b[4] = {};
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void write_f64(std::ofstream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::ifstream& in) {
  unsigned char b[8] = {};
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

// Largest deviation of a factorized polynomial from the polynomial itself.
DecompositionRow decomposition_row(const ScenarioConfig& c) {
  const BumpCover cover = c.cover();
  DecompositionRow row;
  row.degree = c.hamiltonian.degree();
  row.charts = cover.size();
  row.partition_defect = row.degree >= 1 ? cover.partition_defect(std::max(row.degree, 1), 200) : 0.0;
  const AffineFactorization factors = decompose_polynomial(c.hamiltonian, cover);
  const auto samples = cover.domain_samples(200);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> p_dist(-2.0, 2.0);
  const double t0 = c.path->t0();
  const double t1 = c.path->t1();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double t = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(samples.size());
    PhasePoint point{t, c.path->position(t), samples[i], std::vector<double>(c.n)};
    for (auto& p : point.p) p = p_dist(rng);
    row.reconstruction_defect =
        std::max(row.reconstruction_defect, std::abs(factors.evaluate(point) - c.hamiltonian.evaluate(point)));
  }
  return row;
}

}  // namespace

Check Check::make(std::string name, double value, std::string relation, double limit) {
  bool ok = false;
  if (relation == "<=") ok = value <= limit;
  if (relation == ">=") ok = value >= limit;
  if (relation == ">") ok = value > limit;
  return Check{std::move(name), value, std::move(relation), limit, ok && std::isfinite(value)};
}

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

json report_to_json(const RunReport& r) {
  json j;
  j["scenario"] = r.scenario;
  j["steps"] = r.steps;
  put_optional(j, "phases", r.phases, [](const Phases& p) {
    return json{{"total", p.total},
                {"geometric", p.geometric},
                {"dynamic", p.dynamic},
                {"total_unwrapped", p.total_unwrapped},
                {"geometric_unwrapped", p.geometric_unwrapped}};
  });
  j["unitarity_defect"] = r.unitarity_defect;
  j["norm_defect"] = r.norm_defect;
  j["hermiticity_defect"] = r.hermiticity_defect;
  put_optional(j, "holonomy_defect", r.holonomy_defect, [](double v) { return json(v); });
  put_optional(j, "convergence", r.convergence, [](const ConvergenceRow& c) {
    return json{{"base_segments", c.base_segments},
                {"coarse_difference", c.coarse_difference},
                {"fine_difference", c.fine_difference},
                {"ratio", c.ratio},
                {"richardson_stability", c.richardson_stability},
                {"holonomy_norm", c.holonomy_norm}};
  });
  put_optional(j, "reparametrization_difference", r.reparametrization_difference, [](double v) { return json(v); });
  put_optional(j, "split", r.split, [](const SplitRow& s) {
    return json{{"commutator_report", s.commutator_report},
                {"factorization_defect", s.factorization_defect},
                {"asserted", s.asserted}};
  });
  put_optional(j, "ehrenfest", r.ehrenfest, [](const EhrenfestRow& e) {
    return json{{"max_q_error", e.max_q_error}, {"max_p_error", e.max_p_error}};
  });
  put_optional(j, "decomposition", r.decomposition, [](const DecompositionRow& d) {
    return json{{"degree", d.degree},
                {"charts", d.charts},
                {"partition_defect", d.partition_defect},
                {"reconstruction_defect", d.reconstruction_defect}};
  });
  json rows = json::array();
  for (const auto& e : r.expectations) rows.push_back({{"t", e.t}, {"exp_q", e.exp_q}, {"exp_p", e.exp_p}});
  j["expectations"] = std::move(rows);
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  j["checks"] = std::move(checks);
  j["passed"] = r.passed();
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.scenario = j.at("scenario").get<std::string>();
  r.steps = j.at("steps").get<int>();
  r.phases = get_optional<Phases>(j, "phases", [](const json& p) {
    return Phases{p.at("total").get<double>(), p.at("geometric").get<double>(), p.at("dynamic").get<double>(),
                  p.at("total_unwrapped").get<double>(), p.at("geometric_unwrapped").get<double>()};
  });
  r.unitarity_defect = j.at("unitarity_defect").get<double>();
  r.norm_defect = j.at("norm_defect").get<double>();
  r.hermiticity_defect = j.at("hermiticity_defect").get<double>();
  r.holonomy_defect = get_optional<double>(j, "holonomy_defect", [](const json& v) { return v.get<double>(); });
  r.convergence = get_optional<ConvergenceRow>(j, "convergence", [](const json& c) {
    return ConvergenceRow{c.at("base_segments").get<int>(), c.at("coarse_difference").get<double>(),
                          c.at("fine_difference").get<double>(), c.at("ratio").get<double>(),
                          c.at("richardson_stability").get<double>(), c.at("holonomy_norm").get<double>()};
  });
  r.reparametrization_difference =
      get_optional<double>(j, "reparametrization_difference", [](const json& v) { return v.get<double>(); });
  r.split = get_optional<SplitRow>(j, "split", [](const json& s) {
    return SplitRow{s.at("commutator_report").get<double>(), s.at("factorization_defect").get<double>(),
                    s.at("asserted").get<bool>()};
  });
  r.ehrenfest = get_optional<EhrenfestRow>(j, "ehrenfest", [](const json& e) {
    return EhrenfestRow{e.at("max_q_error").get<double>(), e.at("max_p_error").get<double>()};
  });
  r.decomposition = get_optional<DecompositionRow>(j, "decomposition", [](const json& d) {
    return DecompositionRow{d.at("degree").get<int>(), d.at("charts").get<int>(), d.at("partition_defect").get<double>(),
                            d.at("reconstruction_defect").get<double>()};
  });
  for (const auto& e : j.at("expectations")) {
    r.expectations.push_back(
        {e.at("t").get<double>(), e.at("exp_q").get<std::vector<double>>(), e.at("exp_p").get<std::vector<double>>()});
  }
  for (const auto& c : j.at("checks")) r.checks.push_back(check_from(c));
  r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  return r;
}

void write_matrix_dump(const std::filesystem::path& file, const DenseMatrix& matrix) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ModelError("cannot write " + file.string());
  out.write("FQU1", 4);
  write_u32(out, static_cast<std::uint32_t>(matrix.rows()));
  write_u32(out, static_cast<std::uint32_t>(matrix.cols()));
  write_u32(out, 0);
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index k = 0; k < matrix.cols(); ++k) {
      write_f64(out, matrix(i, k).real());
      write_f64(out, matrix(i, k).imag());
    }
  }
}

DenseMatrix read_matrix_dump(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "FQU1", 4) != 0) throw ModelError(file.string() + " is not a matrix dump");
  const auto rows = read_u32(in);
  const auto cols = read_u32(in);
  (void)read_u32(in);
  DenseMatrix m(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t k = 0; k < cols; ++k) {
      const double re = read_f64(in);
      const double im = read_f64(in);
      m(i, k) = Complex(re, im);
    }
  }
  if (!in) throw ModelError(file.string() + " is truncated");
  return m;
}

RunReport run(const ScenarioConfig& c, const std::filesystem::path& out_dir, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.scenario = c.name;
  report.steps = options.steps.value_or(c.steps);
  if (report.steps < 1) throw ModelError("step count must be at least 1");
  const Tolerances& tol = c.tolerances;
  const double t1 = c.path->t1();

  const DrivenHamiltonian dh = staged("assemble", [&] { return c.build(); });
  const bool small_grid = dh.grid().size() <= 256;
  const bool want_dump = options.dump_unitary || c.wants("unitary");
  std::optional<DenseMatrix> dump;
  bool any_unitary = false;
  const auto note_unitary = [&](const DenseMatrix& U, bool candidate_for_dump) {
    report.unitarity_defect = std::max(report.unitarity_defect, unitarity(U));
    any_unitary = true;
    if (candidate_for_dump && !dump) dump = U;
  };

  std::vector<TrajectorySample> trajectory;
  if (c.initial) {
    EvolutionOptions evo;
    evo.steps = report.steps;
    evo.compute_unitary = small_grid && !c.unitary_grid;
    evo.initial = c.initial_state(dh.grid());
    evo.emit_trajectory = true;
    evo.sample_every = c.sample_every;
    EvolutionResult result = staged("propagate", [&] { return evolve_time_ordered(dh, evo); });
    report.hermiticity_defect = std::max(report.hermiticity_defect, result.max_hermiticity_defect);
    if (result.unitary) {
      note_unitary(*result.unitary, true);
    } else {
      report.norm_defect = result.unitarity_defect;
    }
    if (c.wants("phases")) {
      report.phases = Phases{result.phase_total, result.phase_geometric,
                             wrap_phase(result.phase_total - result.phase_geometric), result.phase_total_unwrapped,
                             result.phase_geometric_unwrapped};
    }
    trajectory = std::move(result.trajectory);
    if (c.wants("expectations")) {
      const std::size_t stride = std::max<std::size_t>(1, (trajectory.size() + 99) / 100);
      for (std::size_t i = 0; i < trajectory.size(); i += stride) {
        report.expectations.push_back({trajectory[i].t, trajectory[i].exp_q, trajectory[i].exp_p});
      }
      if ((trajectory.size() - 1) % stride != 0) {
        report.expectations.push_back({trajectory.back().t, trajectory.back().exp_q, trajectory.back().exp_p});
      }
    }
  }

  std::optional<DrivenHamiltonian> coarse;
  if (c.unitary_grid) {
    coarse = staged("assemble", [&] { return c.build(FiberGrid(c.n, c.unitary_grid->N, c.grid.L)); });
    EvolutionOptions evo;
    evo.steps = c.unitary_grid->steps;
    const EvolutionResult result = staged("unitary", [&] { return evolve_time_ordered(*coarse, evo); });
    report.hermiticity_defect = std::max(report.hermiticity_defect, result.max_hermiticity_defect);
    note_unitary(*result.unitary, true);
  }

  if (c.wants("ehrenfest")) {
    staged("ehrenfest", [&] {
      const ClassicalState start_state{c.initial->center, c.initial->kick, c.path->t0()};
      const auto classical = classical_hamilton_flow(dh, start_state, t1, report.steps);
      const double dt = (t1 - c.path->t0()) / report.steps;
      EhrenfestRow row;
      for (const auto& s : trajectory) {
        const auto j = static_cast<std::size_t>(std::lround((s.t - c.path->t0()) / dt));
        const ClassicalState& cl = classical.at(j);
        for (int k = 0; k < c.n; ++k) {
          row.max_q_error = std::max(row.max_q_error, std::abs(s.exp_q[k] - cl.q[k]));
          row.max_p_error = std::max(row.max_p_error, std::abs(s.exp_p[k] - cl.p[k]));
        }
      }
      report.ehrenfest = row;
      report.checks.push_back(Check::make("ehrenfest_q", row.max_q_error, "<=", tol.ehrenfest));
      report.checks.push_back(Check::make("ehrenfest_p", row.max_p_error, "<=", tol.ehrenfest));
      return 0;
    });
  }

  if (c.wants("holonomy")) {
    const DenseMatrix U = staged("holonomy", [&] { return geometric_factor(dh, t1, c.segments); });
    note_unitary(U, !small_grid || !c.initial);
    report.holonomy_defect = (U - DenseMatrix::Identity(U.rows(), U.cols())).norm();
    report.checks.push_back(Check::make("holonomy_defect", *report.holonomy_defect, "<=", tol.holonomy));
    if (report.phases) {
      report.checks.push_back(Check::make("geometric_phase", std::abs(report.phases->geometric), "<=", tol.holonomy));
    }
  }

  if (c.wants("convergence")) {
    const ConvergenceReport conv = staged("convergence", [&] { return geometric_convergence(dh, c.segments); });
    report.convergence = ConvergenceRow{conv.base_segments,        conv.coarse_difference, conv.fine_difference,
                                        conv.ratio,                conv.richardson_stability, conv.holonomy_norm};
    report.checks.push_back(Check::make("convergence_ratio", conv.ratio, ">=", tol.convergence_ratio));
    report.checks.push_back(Check::make("richardson_stability", conv.richardson_stability, "<=", tol.richardson));
    report.checks.push_back(Check::make("holonomy_norm", conv.holonomy_norm, ">", tol.nontrivial_holonomy));
  }
  if (c.wants("reparametrization")) {
    staged("reparametrization", [&] {
      const DenseMatrix a = geometric_factor(dh.with_path(reparametrize_path(*c.path, c.warps[0])), t1, c.segments);
      const DenseMatrix b = geometric_factor(dh.with_path(reparametrize_path(*c.path, c.warps[1])), t1, c.segments);
      note_unitary(a, true);
      note_unitary(b, false);
      report.reparametrization_difference = (a - b).norm();
      report.checks.push_back(
          Check::make("reparametrization_difference", *report.reparametrization_difference, "<=", tol.reparametrization));
      return 0;
    });
  }

  if (c.wants("split")) {
    const DrivenHamiltonian& target = coarse ? *coarse : dh;
    const int steps = c.unitary_grid ? c.unitary_grid->steps : report.steps;
    const SplitResult s = staged("split", [&] { return split_evolution(target, t1, steps, tol.factorization); });
    note_unitary(s.full, false);
    note_unitary(s.geometric, false);
    note_unitary(s.dynamic, false);
    report.split = SplitRow{s.commutator_report, s.factorization_defect, s.asserted};
    if (s.asserted) {
      report.checks.push_back(Check::make("factorization_defect", s.factorization_defect, "<=", tol.factorization));
    }
  }

  if (c.wants("decomposition")) {
    report.decomposition = staged("decomposition", [&] { return decomposition_row(c); });
    if (report.decomposition->degree >= 2) {
      report.checks.push_back(
          Check::make("partition_defect", report.decomposition->partition_defect, "<=", tol.decomposition));
    }
    report.checks.push_back(
        Check::make("reconstruction_defect", report.decomposition->reconstruction_defect, "<=", tol.decomposition));
  }

  if (any_unitary) report.checks.push_back(Check::make("unitarity", report.unitarity_defect, "<=", tol.unitarity));
  if (c.initial && !(small_grid && !c.unitary_grid)) {
    report.checks.push_back(Check::make("norm_conservation", report.norm_defect, "<=", tol.unitarity));
  }

  if (want_dump && !dump) {
    dump = staged("unitary", [&] { return geometric_factor(coarse ? *coarse : dh, t1, c.segments); });
  }

  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    if (!trajectory.empty()) write_csv(out_dir / "trajectory.csv", c.m, c.n, trajectory);
    if (want_dump) write_matrix_dump(out_dir / "unitary.bin", *dump);
    std::ofstream out(out_dir / "report.json");
    if (!out) throw ModelError("cannot write " + (out_dir / "report.json").string());
    out << report_to_json(report).dump(2) << '\n';
  }
  return report;
}

}  // namespace fqu::cli
