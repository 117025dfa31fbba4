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

#include "fqu/cli/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fqu/coordinates.hpp"

namespace fqu::cli {
namespace {

using nlohmann::json;

std::string escape_token(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

// A JSON value together with its pointer, for located error messages.
class Node {
 public:
  Node(const json& value, std::string pointer) : value_(&value), pointer_(std::move(pointer)) {}

  const std::string& pointer() const noexcept { return pointer_; }
  const json& value() const noexcept { return *value_; }

  [[noreturn]] void fail(const std::string& message) const { throw ScenarioError(pointer_.empty() ? "/" : pointer_, message); }

  Node at(std::string_view key) const {
    require_object();
    const auto it = value_->find(key);
    if (it == value_->end()) throw ScenarioError(child_pointer(key), "required field is missing");
    return Node(*it, child_pointer(key));
  }
  std::optional<Node> find(std::string_view key) const {
    require_object();
    const auto it = value_->find(key);
    if (it == value_->end()) return std::nullopt;
    return Node(*it, child_pointer(key));
  }
  Node at(std::size_t index) const { return Node((*value_)[index], pointer_ + "/" + std::to_string(index)); }

  void allow_keys(std::initializer_list<std::string_view> keys) const {
    require_object();
    for (const auto& [key, unused] : value_->items()) {
      (void)unused;
      bool known = false;
      for (auto k : keys) known = known || k == key;
      if (!known) throw ScenarioError(child_pointer(key), "unknown field");
    }
  }

  void require_object() const {
    if (!value_->is_object()) fail("expected an object");
  }
  std::size_t array_size() const {
    if (!value_->is_array()) fail("expected an array");
    return value_->size();
  }
  std::string string() const {
    if (!value_->is_string()) fail("expected a string");
    return value_->get<std::string>();
  }
  bool boolean() const {
    if (!value_->is_boolean()) fail("expected true or false");
    return value_->get<bool>();
  }
  int integer(int minimum) const {
    if (!value_->is_number_integer()) fail("expected an integer");
    const auto v = value_->get<long long>();
    if (v < minimum || v > 1'000'000'000) fail("value " + std::to_string(v) + " is out of range");
    return static_cast<int>(v);
  }
  /// A number, or a string holding a constant expression such as "2*pi".
  double scalar(const std::map<std::string, double, std::less<>>& constants) const {
    double v = 0.0;
    if (value_->is_number()) {
      v = value_->get<double>();
    } else if (value_->is_string()) {
      v = eval(expression({}, constants), {});
    } else {
      fail("expected a number");
    }
    if (!std::isfinite(v)) fail("value is not finite");
    return v;
  }
  double positive(const std::map<std::string, double, std::less<>>& constants) const {
    const double v = scalar(constants);
    if (!(v > 0.0)) fail("expected a positive number");
    return v;
  }
  Expr expression(std::span<const std::string> vars, const std::map<std::string, double, std::less<>>& constants) const {
    const std::string source = string();
    try {
      return parse_expr(source, vars, constants);
    } catch (const ParseError& e) {
      fail(std::string("expression error: ") + e.what());
    }
  }
  std::vector<double> vector(int size, const std::map<std::string, double, std::less<>>& constants) const {
    if (static_cast<int>(array_size()) != size) fail("expected " + std::to_string(size) + " entries");
    std::vector<double> out;
    for (int i = 0; i < size; ++i) out.push_back(at(static_cast<std::size_t>(i)).scalar(constants));
    return out;
  }

 private:
  std::string child_pointer(std::string_view key) const { return pointer_ + "/" + escape_token(key); }

  const json* value_;
  std::string pointer_;
};

using Constants = std::map<std::string, double, std::less<>>;

void read_connection(const Node& node, ScenarioConfig& c) {
  node.allow_keys({"lambda", "drift"});
  const auto slots = coefficient_variables(c.m, c.n);
  c.bundle = BundleModel::flat(c.m, c.n);
  if (auto lambda = node.find("lambda")) {
    if (static_cast<int>(lambda->array_size()) != c.n) lambda->fail("expected " + std::to_string(c.n) + " rows");
    for (int k = 0; k < c.n; ++k) {
      const Node row = lambda->at(static_cast<std::size_t>(k));
      if (static_cast<int>(row.array_size()) != c.m) row.fail("expected " + std::to_string(c.m) + " entries");
      for (int l = 0; l < c.m; ++l) {
        c.bundle.sigma_connection[k][l] = row.at(static_cast<std::size_t>(l)).expression(slots, c.constants);
      }
    }
  }
  if (auto drift = node.find("drift")) {
    if (static_cast<int>(drift->array_size()) != c.n) drift->fail("expected " + std::to_string(c.n) + " entries");
    for (int k = 0; k < c.n; ++k) c.bundle.time_drift[k] = drift->at(static_cast<std::size_t>(k)).expression(slots, c.constants);
  }
}

void read_path(const Node& node, ScenarioConfig& c) {
  node.allow_keys({"kind", "components", "knots", "values", "span", "closed"});
  const std::string kind = node.at("kind").string();
  const bool closed = node.find("closed") ? node.at("closed").boolean() : false;
  try {
    if (kind == "closed_form") {
      const Node span = node.at("span");
      const auto bounds = span.vector(2, c.constants);
      if (!(bounds[1] > bounds[0])) span.fail("span must be increasing");
      const Node comps = node.at("components");
      if (static_cast<int>(comps.array_size()) != c.m) comps.fail("expected " + std::to_string(c.m) + " components");
      std::vector<Expr> chi;
      for (int l = 0; l < c.m; ++l) chi.push_back(comps.at(static_cast<std::size_t>(l)).expression(parameter_variables(0), c.constants));
      c.path = ParameterPath::closed_form(std::move(chi), bounds[0], bounds[1], closed);
    } else if (kind == "samples") {
      const Node knots_node = node.at("knots");
      const int count = static_cast<int>(knots_node.array_size());
      const auto knots = knots_node.vector(count, c.constants);
      const Node values_node = node.at("values");
      if (static_cast<int>(values_node.array_size()) != count) values_node.fail("expected one value per knot");
      std::vector<std::vector<double>> values;
      for (int i = 0; i < count; ++i) values.push_back(values_node.at(static_cast<std::size_t>(i)).vector(c.m, c.constants));
      if (auto span = node.find("span")) {
        const auto bounds = span->vector(2, c.constants);
        if (count == 0 || bounds[0] != knots.front() || bounds[1] != knots.back()) span->fail("span must match the first and last knots");
      }
      c.path = ParameterPath::sampled(knots, std::move(values), closed);
    } else {
      node.at("kind").fail("expected \"closed_form\" or \"samples\"");
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const Error& e) {
    node.fail(e.what());
  }
}

void read_hamiltonian(const Node& node, ScenarioConfig& c) {
  const auto slots = coefficient_variables(c.m, c.n);
  c.hamiltonian = PolynomialObservable(c.m, c.n);
  const std::size_t count = node.array_size();
  for (std::size_t i = 0; i < count; ++i) {
    const Node term = node.at(i);
    term.allow_keys({"index", "coeff"});
    const Node index_node = term.at("index");
    MultiIndex index;
    for (std::size_t j = 0; j < index_node.array_size(); ++j) {
      const Node entry = index_node.at(j);
      const int k = entry.integer(0);
      if (k >= c.n) entry.fail("momentum index " + std::to_string(k) + " exceeds the fiber dimension");
      index.push_back(k);
    }
    const Expr coeff = term.at("coeff").expression(slots, c.constants);
    try {
      c.hamiltonian.add_term(index, coeff);
    } catch (const Error& e) {
      term.fail(e.what());
    }
  }
}

OrderingRule read_ordering(const Node& node) {
  const std::string name = node.string();
  if (name == "symmetric") return OrderingRule::Symmetric;
  if (name == "left") return OrderingRule::Left;
  if (name == "right") return OrderingRule::Right;
  node.fail("expected \"symmetric\", \"left\" or \"right\"");
}

void read_integrator(const Node& node, ScenarioConfig& c) {
  node.allow_keys({"steps", "segments", "ordering", "sample_every", "unitary_grid"});
  c.steps = node.at("steps").integer(1);
  if (auto s = node.find("segments")) c.segments = s->integer(1);
  if (auto o = node.find("ordering")) c.ordering = read_ordering(*o);
  if (auto s = node.find("sample_every")) c.sample_every = s->integer(1);
  if (auto u = node.find("unitary_grid")) {
    u->allow_keys({"N", "steps"});
    c.unitary_grid = UnitaryGridSpec{u->at("N").integer(8), u->at("steps").integer(1)};
  }
}

void read_tolerances(const Node& node, Tolerances& t, const Constants& constants) {
  node.allow_keys({"unitarity", "holonomy", "ehrenfest", "richardson", "convergence_ratio",
                   "nontrivial_holonomy", "reparametrization", "factorization", "decomposition"});
  const auto set = [&](std::string_view key, double& slot) {
    if (auto v = node.find(key)) slot = v->positive(constants);
  };
  set("unitarity", t.unitarity);
  set("holonomy", t.holonomy);
  set("ehrenfest", t.ehrenfest);
  set("richardson", t.richardson);
  set("convergence_ratio", t.convergence_ratio);
  set("nontrivial_holonomy", t.nontrivial_holonomy);
  set("reparametrization", t.reparametrization);
  set("factorization", t.factorization);
  set("decomposition", t.decomposition);
}

}  // namespace

const std::set<std::string>& known_outputs() {
  static const std::set<std::string> names{"phases", "expectations", "ehrenfest", "holonomy", "convergence",
                                           "reparametrization", "split", "decomposition", "unitary"};
  return names;
}

std::string ordering_name(OrderingRule rule) {
  switch (rule) {
    case OrderingRule::Left:
      return "left";
    case OrderingRule::Right:
      return "right";
    case OrderingRule::Symmetric:
      break;
  }
  return "symmetric";
}

BumpCover ScenarioConfig::cover() const {
  if (cover_charts == 1) return BumpCover::single_chart(n, -grid.L, grid.L);
  return BumpCover::uniform(n, cover_charts, -grid.L, grid.L, cover_overlap);
}

FiberGrid ScenarioConfig::fiber_grid() const { return FiberGrid(n, grid.N, grid.L); }

DrivenHamiltonian ScenarioConfig::build() const { return build(fiber_grid()); }

DrivenHamiltonian ScenarioConfig::build(const FiberGrid& g) const {
  return DrivenHamiltonian(bundle, *path, hamiltonian, cover(), g, ordering);
}

WaveSection ScenarioConfig::initial_state(const FiberGrid& g) const {
  if (!initial) throw ModelError("scenario has no initial state");
  WaveSection psi = WaveSection::gaussian(g, initial->center, initial->width, initial->kick);
  psi.time = path->t0();
  psi.sigma = path->position(path->t0());
  return psi;
}

ScenarioConfig parse_scenario(const json& document) {
  const Node root(document, "");
  root.allow_keys({"name", "constants", "dims", "connection", "path", "hamiltonian", "cover", "grid", "integrator",
                   "initial", "reparametrization", "tolerances", "outputs"});
  ScenarioConfig c;
  c.source = document;
  c.name = root.find("name") ? root.at("name").string() : "scenario";

  if (auto constants = root.find("constants")) {
    constants->require_object();
    for (const auto& [key, unused] : constants->value().items()) {
      (void)unused;
      const Node v = constants->at(key);
      if (key == "pi" || key == "t" || key.empty()) v.fail("constant name is reserved or empty");
      c.constants[key] = v.scalar({});
    }
  }

  const Node dims = root.at("dims");
  dims.allow_keys({"m", "n"});
  c.m = dims.at("m").integer(1);
  c.n = dims.at("n").integer(1);
  if (c.n > 2) dims.at("n").fail("fiber dimension must be 1 or 2");
  if (c.m > 16) dims.at("m").fail("parameter dimension must be at most 16");

  if (auto connection = root.find("connection")) {
    read_connection(*connection, c);
  } else {
    c.bundle = BundleModel::flat(c.m, c.n);
  }
  read_path(root.at("path"), c);
  c.hamiltonian = PolynomialObservable(c.m, c.n);
  if (auto h = root.find("hamiltonian")) read_hamiltonian(*h, c);

  const Node grid = root.at("grid");
  grid.allow_keys({"N", "L"});
  c.grid.N = grid.at("N").integer(8);
  c.grid.L = grid.at("L").positive(c.constants);
  if (c.n == 2 && c.grid.N > 128) grid.at("N").fail("at most 128 points per axis in two dimensions");
  if (c.n == 1 && c.grid.N > 8192) grid.at("N").fail("at most 8192 points");

  if (auto cover = root.find("cover")) {
    cover->allow_keys({"charts", "overlap"});
    c.cover_charts = cover->at("charts").integer(1);
    if (auto o = cover->find("overlap")) c.cover_overlap = o->positive(c.constants);
    try {
      (void)c.cover();
    } catch (const Error& e) {
      cover->fail(e.what());
    }
  }

  read_integrator(root.at("integrator"), c);

  if (auto initial = root.find("initial")) {
    initial->allow_keys({"center", "width", "kick"});
    InitialSpec spec;
    spec.center = initial->at("center").vector(c.n, c.constants);
    spec.width = initial->find("width") ? initial->at("width").positive(c.constants) : 1.0;
    spec.kick = initial->find("kick") ? initial->at("kick").vector(c.n, c.constants) : std::vector<double>(c.n, 0.0);
    c.initial = spec;
  }

  if (auto rep = root.find("reparametrization")) {
    rep->allow_keys({"warps"});
    const Node warps = rep->at("warps");
    if (warps.array_size() != 2) warps.fail("expected exactly two warps");
    for (std::size_t i = 0; i < 2; ++i) {
      const Node w = warps.at(i);
      c.warps.push_back(w.expression(parameter_variables(0), c.constants));
      try {
        (void)c.path->warped(c.warps.back());
      } catch (const Error& e) {
        w.fail(e.what());
      }
    }
  }

  if (auto tol = root.find("tolerances")) read_tolerances(*tol, c.tolerances, c.constants);

  if (auto outputs = root.find("outputs")) {
    for (std::size_t i = 0; i < outputs->array_size(); ++i) {
      const Node o = outputs->at(i);
      const std::string name = o.string();
      if (!known_outputs().count(name)) o.fail("unknown output \"" + name + "\"");
      c.outputs.insert(name);
    }
  }

  const bool needs_state = c.wants("phases") || c.wants("expectations") || c.wants("ehrenfest");
  if (needs_state && !c.initial) root.fail("outputs need an \"initial\" state");
  if (c.wants("reparametrization") && c.warps.size() != 2) root.fail("reparametrization output needs two warps");

  try {
    (void)c.fiber_grid();
    (void)c.build();
  } catch (const Error& e) {
    root.fail(e.what());
  }
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ScenarioError("/", "cannot open " + file.string());
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError("/", std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(document);
}

}  // namespace fqu::cli
