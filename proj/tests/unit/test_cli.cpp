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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "fqu/cli/presets.hpp"
#include "fqu/cli/run.hpp"
#include "fqu/cli/scenario.hpp"
#include "fqu/cli/verify.hpp"

using namespace fqu;
using namespace fqu::cli;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fqu_cli_tests_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json small_flat_loop() {
  json doc = preset_document("flat_loop");
  doc["grid"]["N"] = 16;
  doc["integrator"]["steps"] = 64;
  doc["integrator"]["segments"] = 64;
  doc["integrator"]["sample_every"] = 4;
  return doc;
}

std::string pointer_of(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const ScenarioError& e) {
    return e.pointer();
  }
  return "";
}

int exit_code(const std::string& args) {
  const std::string command = std::string(FQU_EXECUTABLE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("shipped presets parse and match the embedded copies") {
    for (const auto& name : preset_names()) {
      CAPTURE(name);
      const ScenarioConfig c = load_scenario(fs::path(FQU_PRESET_DIR) / (name + ".json"));
      CHECK(c.name == name);
      CHECK(c.source == preset_document(name));
    }
    const ScenarioConfig driven = parse_scenario(preset_document("driven_oscillator"));
    CHECK(driven.grid.N == 512);
    CHECK(driven.steps == 10000);
    CHECK(driven.wants("ehrenfest"));
    CHECK_THROWS_AS(preset_document("missing"), ModelError);
  }

  TEST_CASE("schema errors carry a JSON pointer") {
    json doc = small_flat_loop();
    doc["grid"].erase("N");
    CHECK(pointer_of(doc) == "/grid/N");

    doc = preset_document("driven_oscillator");
    doc["connection"]["lambda"][0][0] = "q3";
    std::string message;
    try {
      parse_scenario(doc);
    } catch (const ScenarioError& e) {
      message = e.what();
      CHECK(e.pointer() == "/connection/lambda/0/0");
    }
    CHECK(message.find("q3") != std::string::npos);
    CHECK(message.find("offset 0") != std::string::npos);

    doc = small_flat_loop();
    doc["hamiltonian"] = json::array({{{"index", json::array({0})}, {"coeff", "1 +"}}});
    CHECK(pointer_of(doc) == "/hamiltonian/0/coeff");

    doc = small_flat_loop();
    doc["extra"] = 1;
    CHECK(pointer_of(doc) == "/extra");

    doc = small_flat_loop();
    doc["outputs"].push_back("plots");
    CHECK(pointer_of(doc) == "/outputs/4");

    doc = small_flat_loop();
    doc["integrator"]["ordering"] = "weyl";
    CHECK(pointer_of(doc) == "/integrator/ordering");

    doc = small_flat_loop();
    doc["dims"]["n"] = 3;
    CHECK(pointer_of(doc) == "/dims/n");

    doc = small_flat_loop();
    doc["grid"]["N"] = 4;
    CHECK(pointer_of(doc) == "/grid/N");

    doc = small_flat_loop();
    doc["path"]["span"] = json::array({0, 1});
    CHECK(pointer_of(doc) == "/path");

    doc = small_flat_loop();
    doc["hamiltonian"] = json::array({{{"index", json::array({1})}, {"coeff", "1"}}});
    CHECK(pointer_of(doc) == "/hamiltonian/0/index/0");

    doc = small_flat_loop();
    doc.erase("initial");
    CHECK(pointer_of(doc) == "/");

    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ScenarioError);
  }

  TEST_CASE("constants and constant expressions") {
    json doc = small_flat_loop();
    doc["constants"] = {{"r", 0.5}};
    doc["path"]["components"] = json::array({"r*cos(t)", "r*sin(t)"});
    const ScenarioConfig c = parse_scenario(doc);
    CHECK(c.path->position(0.0)[0] == doctest::Approx(0.5));
    CHECK(c.path->t1() == doctest::Approx(2.0 * std::numbers::pi));
  }

  TEST_CASE("sampled paths") {
    json doc = small_flat_loop();
    json knots = json::array();
    json values = json::array();
    for (int i = 0; i <= 16; ++i) {
      const double t = 2.0 * std::numbers::pi * i / 16.0;
      knots.push_back(t);
      values.push_back({std::cos(t), std::sin(t)});
    }
    values[16] = values[0];
    doc["path"] = {{"kind", "samples"}, {"knots", knots}, {"values", values}, {"closed", true}};
    const ScenarioConfig c = parse_scenario(doc);
    CHECK(!c.path->is_closed_form());
    const RunReport r = run(c, {});
    CHECK(*r.holonomy_defect <= 1e-7);
  }

  TEST_CASE("run writes a report, a trajectory and a dump") {
    const fs::path out = scratch("run");
    const ScenarioConfig c = parse_scenario(small_flat_loop());
    const RunReport report = run(c, out, {});
    CHECK(report.passed());
    REQUIRE(report.phases.has_value());
    CHECK(std::abs(report.phases->geometric) <= 1e-7);
    CHECK(std::abs(report.phases->dynamic - wrap_phase(report.phases->total - report.phases->geometric)) <= 1e-15);
    CHECK(report.unitarity_defect <= 1e-10);
    CHECK(!report.expectations.empty());

    const RunReport reloaded = report_from_json(json::parse(read_text(out / "report.json")));
    CHECK(reloaded == report);

    const std::string csv = read_text(out / "trajectory.csv");
    const std::string header = csv.substr(0, csv.find('\n'));
    CHECK(header ==
          "t,sigma_1,sigma_2,dsigma_dt_1,dsigma_dt_2,exp_q_1,exp_p_1,norm,phase_total,phase_geometric,"
          "unitarity_defect,phase_total_unwrapped,phase_geometric_unwrapped");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 64 / 4 + 1);

    const std::string dump = read_text(out / "unitary.bin");
    REQUIRE(dump.size() == 16 + 16 * 16 * 16);
    CHECK(dump.substr(0, 4) == "FQU1");
    CHECK(static_cast<unsigned char>(dump[4]) == 16);
    CHECK(static_cast<unsigned char>(dump[8]) == 16);
    const DenseMatrix U = read_matrix_dump(out / "unitary.bin");
    CHECK((U.adjoint() * U - DenseMatrix::Identity(16, 16)).norm() <= 1e-10);
  }

  TEST_CASE("runs are deterministic") {
    const ScenarioConfig c = parse_scenario(small_flat_loop());
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    RunReport ra = run(c, a, {});
    RunReport rb = run(c, b, {});
    CHECK(read_text(a / "trajectory.csv") == read_text(b / "trajectory.csv"));
    CHECK(read_text(a / "unitary.bin") == read_text(b / "unitary.bin"));
    ra.wall_clock_seconds = rb.wall_clock_seconds = 0.0;
    CHECK(ra == rb);
  }

  TEST_CASE("step override") {
    const ScenarioConfig c = parse_scenario(small_flat_loop());
    RunOptions options;
    options.steps = 32;
    CHECK(run(c, {}, options).steps == 32);
    options.steps = 0;
    CHECK_THROWS_AS(run(c, {}, options), ModelError);
  }

  TEST_CASE("report round trip with every section") {
    RunReport r;
    r.scenario = "x";
    r.steps = 3;
    r.phases = Phases{0.1, -0.2, 0.3, 6.4, -0.2};
    r.unitarity_defect = 1e-12;
    r.holonomy_defect = 0.25;
    r.convergence = ConvergenceRow{8, 1.0, 0.25, 4.0, 1e-9, 3.0};
    r.reparametrization_difference = 1.0 / 3.0;
    r.split = SplitRow{0.5, 0.125, false};
    r.ehrenfest = EhrenfestRow{1e-4, 2e-4};
    r.decomposition = DecompositionRow{4, 3, 1e-16, 2e-16};
    r.expectations.push_back({0.5, {0.1}, {0.2}});
    r.checks.push_back(Check::make("a", 0.1, "<=", 0.2));
    r.wall_clock_seconds = 0.75;
    CHECK(report_from_json(json::parse(report_to_json(r).dump())) == r);
  }

  TEST_CASE("checks compare by relation") {
    CHECK(Check::make("a", 1.0, "<=", 1.0).passed);
    CHECK_FALSE(Check::make("a", 1.0, ">", 1.0).passed);
    CHECK(Check::make("a", 2.0, ">=", 1.0).passed);
    CHECK_FALSE(Check::make("a", std::nan(""), "<=", 1.0).passed);
  }

  TEST_CASE("verify suites") {
    CHECK_THROWS_WITH_AS(verify_suite("unknown"), doctest::Contains("dirac, hermiticity"), ModelError);
    for (const auto& c : verify_suite("dirac")) {
      CAPTURE(c.name);
      CHECK(c.passed);
    }
  }

  TEST_CASE("exit codes") {
    const fs::path dir = scratch("exit");
    CHECK(exit_code("--version") == 0);
    CHECK(exit_code("preset flat_loop --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "flat_loop.json"));
    CHECK(exit_code("preset nothing --out " + dir.string()) == 1);
    CHECK(exit_code("verify nothing") == 1);
    CHECK(exit_code("run " + (dir / "missing.json").string()) == 1);
    CHECK(exit_code("bogus") == 1);

    const auto write = [&](const std::string& name, const json& doc) {
      std::ofstream(dir / name) << doc.dump();
      return (dir / name).string();
    };
    CHECK(exit_code("run " + write("small.json", small_flat_loop()) + " --out " + (dir / "small").string()) == 0);

    json strict = small_flat_loop();
    strict["tolerances"] = {{"holonomy", 1e-300}};
    CHECK(exit_code("run " + write("strict.json", strict) + " --out " + (dir / "strict").string()) == 3);

    json unstable = small_flat_loop();
    unstable["dims"] = {{"m", 1}, {"n", 1}};
    unstable["connection"] = {{"lambda", json::array({json::array({"0"})})}};
    unstable["path"] = {{"kind", "closed_form"}, {"components", json::array({"0"})}, {"span", json::array({0, 5})}};
    unstable["hamiltonian"] = json::array({{{"index", json::array({0, 0})}, {"coeff", "0.5"}},
                                           {{"index", json::array()}, {"coeff", "-q1^4"}}});
    unstable["initial"] = {{"center", json::array({1.0})}};
    unstable["outputs"] = json::array({"ehrenfest"});
    CHECK(exit_code("run " + write("unstable.json", unstable) + " --out " + (dir / "unstable").string()) == 2);
  }
}
