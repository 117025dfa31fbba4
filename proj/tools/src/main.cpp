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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fqu/cli/presets.hpp"
#include "fqu/cli/run.hpp"
#include "fqu/cli/scenario.hpp"
#include "fqu/cli/verify.hpp"
#include "fqu/error.hpp"

namespace {

constexpr int kValidation = 1;
constexpr int kNumerical = 2;
constexpr int kVerification = 3;

std::string format_check(const fqu::cli::Check& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "[%s] %s = %.3e (%s %.3e)", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value,
                c.relation.c_str(), c.limit);
  return buf;
}

int print_checks(const std::vector<fqu::cli::Check>& checks) {
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << format_check(c) << '\n';
    ok = ok && c.passed;
  }
  return ok ? 0 : kVerification;
}

int run_command(const std::string& config, std::string out, std::optional<int> steps, bool dump) {
  const fqu::cli::ScenarioConfig scenario = fqu::cli::load_scenario(config);
  if (out.empty()) out = "fqu-" + scenario.name;
  const fqu::cli::RunReport report = fqu::cli::run(scenario, out, {steps, dump});
  std::cout << "scenario " << report.scenario << ", " << report.steps << " steps, "
            << report.wall_clock_seconds << " s, output in " << out << '\n';
  return print_checks(report.checks);
}

int preset_command(const std::string& name, const std::string& out) {
  const nlohmann::json document = fqu::cli::preset_document(name);
  std::filesystem::create_directories(out);
  const std::filesystem::path file = std::filesystem::path(out) / (name + ".json");
  std::ofstream stream(file);
  if (!stream) throw fqu::ModelError("cannot write " + file.string());
  stream << document.dump(2) << '\n';
  std::cout << file.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric quantization of driven mechanical systems"};
  app.set_version_flag("--version", std::string("fqu ") + FQU_VERSION);
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::optional<int> steps;
  bool dump = false;
  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("config", config, "Scenario JSON file")->required();
  run->add_option("--out", out, "Output directory");
  run->add_option("--steps", steps, "Override the integrator step count")->check(CLI::PositiveNumber);
  run->add_flag("--dump-unitary", dump, "Write unitary.bin");

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run a property suite");
  verify->add_option("suite", suite, "dirac, hermiticity, holonomy, ehrenfest, decomposition or all")->required();

  std::string preset;
  std::string preset_out = ".";
  auto* materialize = app.add_subcommand("preset", "Write a shipped preset as a scenario file");
  materialize->add_option("name", preset, "Preset name")->required();
  materialize->add_option("--out", preset_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  try {
    if (*run) return run_command(config, out, steps, dump);
    if (*verify) return print_checks(fqu::cli::verify_suite(suite));
    if (*materialize) return preset_command(preset, preset_out);
  } catch (const fqu::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const fqu::EvalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const fqu::Error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  }
  return 0;
}
