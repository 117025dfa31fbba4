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

#include "fqu/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "fqu/error.hpp"

namespace fqu {

struct Expr::Node {
  Op op = Op::Constant;
  double value = 0.0;
  std::string name;
  int integer = 0;
  std::vector<Expr> args;
};

namespace {

const std::shared_ptr<const Expr::Node>& zero_node() {
  static const auto node = std::make_shared<const Expr::Node>();
  return node;
}

// ---- scalar kernels shared by the tree walker and the compiled evaluator ----

double checked_div(double a, double b) {
  if (b == 0.0) throw EvalError("division by zero");
  return a / b;
}

double checked_sqrt(double x) {
  if (x < 0.0) throw EvalError("sqrt of negative argument");
  return std::sqrt(x);
}

double checked_pow(double x, int n) {
  if (n < 0 && x == 0.0) throw EvalError("negative power of zero");
  return std::pow(x, n);
}

double bump_value(double x, double c, double r) {
  if (!(r > 0.0)) throw EvalError("bump radius must be positive");
  const double u = (x - c) / r;
  const double w = 1.0 - u * u;
  if (w <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / w);
}

double mollifier_value(double w, int k) {
  if (w <= 0.0) return 0.0;
  // exp(1 - 1/w) underflows long before w^-k overflows; combine in log space.
  return std::exp(1.0 - 1.0 / w - k * std::log(w));
}

double root_value(double x, int k) {
  if (x < 0.0) throw EvalError("root of negative argument");
  if (k == 1) return x;
  if (k == 2) return std::sqrt(x);
  if (k == 3) return std::cbrt(x);
  return std::pow(x, 1.0 / k);
}

double finite_or_throw(double v) {
  if (!std::isfinite(v)) throw EvalError("non-finite result");
  return v;
}

}  // namespace

Expr make_node(Op op, std::vector<Expr> args, int integer) {
  auto node = std::make_shared<Expr::Node>();
  node->op = op;
  node->args = std::move(args);
  node->integer = integer;
  return Expr(std::move(node));
}

Expr::Expr() : node_(zero_node()) {}

Expr Expr::constant(double value) {
  auto node = std::make_shared<Node>();
  node->op = Op::Constant;
  node->value = value;
  return Expr(std::move(node));
}

Expr Expr::variable(std::string name) {
  auto node = std::make_shared<Node>();
  node->op = Op::Variable;
  node->name = std::move(name);
  return Expr(std::move(node));
}

Op Expr::op() const noexcept { return node_->op; }
double Expr::value() const noexcept { return node_->value; }
const std::string& Expr::name() const noexcept { return node_->name; }
int Expr::integer() const noexcept { return node_->integer; }
std::span<const Expr> Expr::args() const noexcept { return node_->args; }

bool Expr::same_as(const Expr& other) const {
  if (node_ == other.node_) return true;
  if (op() != other.op()) return false;
  switch (op()) {
    case Op::Constant:
      return value() == other.value();
    case Op::Variable:
      return name() == other.name();
    default:
      break;
  }
  if (integer() != other.integer() || args().size() != other.args().size()) return false;
  for (std::size_t i = 0; i < args().size(); ++i) {
    if (!args()[i].same_as(other.args()[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Smart constructors

namespace {

Expr fold_unary(Op op, const Expr& x, double (*f)(double)) {
  if (x.is_constant()) {
    const double v = f(x.value());
    if (std::isfinite(v)) return Expr::constant(v);
  }
  return make_node(op, {x}, 0);
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() + b.value());
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return make_node(Op::Add, {a, b}, 0);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() - b.value());
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  return make_node(Op::Sub, {a, b}, 0);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() * b.value());
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  return make_node(Op::Mul, {a, b}, 0);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) {
    return Expr::constant(a.value() / b.value());
  }
  if (a.is_zero()) return Expr();
  if (b.is_one()) return a;
  return make_node(Op::Div, {a, b}, 0);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  return make_node(Op::Neg, {a}, 0);
}

Expr pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr::constant(1.0);
  if (exponent == 1) return base;
  if (base.is_constant()) {
    const double v = std::pow(base.value(), exponent);
    if (std::isfinite(v)) return Expr::constant(v);
  }
  return make_node(Op::Pow, {base}, exponent);
}

Expr sin(const Expr& x) { return fold_unary(Op::Sin, x, [](double v) { return std::sin(v); }); }
Expr cos(const Expr& x) { return fold_unary(Op::Cos, x, [](double v) { return std::cos(v); }); }
Expr exp(const Expr& x) { return fold_unary(Op::Exp, x, [](double v) { return std::exp(v); }); }
Expr tanh(const Expr& x) { return fold_unary(Op::Tanh, x, [](double v) { return std::tanh(v); }); }

Expr sqrt(const Expr& x) {
  if (x.is_constant() && x.value() >= 0.0) return Expr::constant(std::sqrt(x.value()));
  return make_node(Op::Sqrt, {x}, 0);
}

Expr bump(const Expr& x, const Expr& center, const Expr& radius) {
  if (x.is_constant() && center.is_constant() && radius.is_constant() && radius.value() > 0.0) {
    return Expr::constant(bump_value(x.value(), center.value(), radius.value()));
  }
  return make_node(Op::Bump, {x, center, radius}, 0);
}

Expr mollifier(const Expr& w, int order) {
  if (order < 0) throw ModelError("mollifier order must be nonnegative");
  if (w.is_constant()) return Expr::constant(mollifier_value(w.value(), order));
  return make_node(Op::Mollifier, {w}, order);
}

Expr root(const Expr& x, int degree) {
  if (degree < 1) throw ModelError("root degree must be positive");
  if (degree == 1) return x;
  if (degree == 2) return sqrt(x);
  if (x.is_constant() && x.value() >= 0.0) return Expr::constant(root_value(x.value(), degree));
  return make_node(Op::Root, {x}, degree);
}

// ---------------------------------------------------------------------------
// Queries

namespace {

void collect_variables(const Expr& e, std::set<std::string>& out) {
  if (e.op() == Op::Variable) {
    out.insert(e.name());
    return;
  }
  for (const Expr& a : e.args()) collect_variables(a, out);
}

}  // namespace

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect_variables(e, out);
  return out;
}

bool depends_on(const Expr& e, std::string_view var) {
  if (e.op() == Op::Variable) return e.name() == var;
  for (const Expr& a : e.args()) {
    if (depends_on(a, var)) return true;
  }
  return false;
}

namespace {

Expr rebuild(const Expr& e, std::vector<Expr> args) {
  switch (e.op()) {
    case Op::Add: return args[0] + args[1];
    case Op::Sub: return args[0] - args[1];
    case Op::Mul: return args[0] * args[1];
    case Op::Div: return args[0] / args[1];
    case Op::Neg: return -args[0];
    case Op::Pow: return pow(args[0], e.integer());
    case Op::Sin: return sin(args[0]);
    case Op::Cos: return cos(args[0]);
    case Op::Exp: return exp(args[0]);
    case Op::Tanh: return tanh(args[0]);
    case Op::Sqrt: return sqrt(args[0]);
    case Op::Bump: return bump(args[0], args[1], args[2]);
    case Op::Mollifier: return mollifier(args[0], e.integer());
    case Op::Root: return root(args[0], e.integer());
    case Op::Constant:
    case Op::Variable: break;
  }
  return e;
}

}  // namespace

Expr substitute(const Expr& e, std::string_view var, const Expr& replacement) {
  if (e.op() == Op::Variable) return e.name() == var ? replacement : e;
  if (e.op() == Op::Constant || !depends_on(e, var)) return e;
  std::vector<Expr> args;
  args.reserve(e.args().size());
  for (const Expr& a : e.args()) args.push_back(substitute(a, var, replacement));
  return rebuild(e, std::move(args));
}

// ---------------------------------------------------------------------------
// Differentiation

Expr diff(const Expr& e, std::string_view var) {
  if (!depends_on(e, var)) return Expr();
  const auto args = e.args();
  switch (e.op()) {
    case Op::Constant:
      return Expr();
    case Op::Variable:
      return Expr::constant(1.0);
    case Op::Add:
      return diff(args[0], var) + diff(args[1], var);
    case Op::Sub:
      return diff(args[0], var) - diff(args[1], var);
    case Op::Mul:
      return diff(args[0], var) * args[1] + args[0] * diff(args[1], var);
    case Op::Div: {
      const Expr& a = args[0];
      const Expr& b = args[1];
      return (diff(a, var) * b - a * diff(b, var)) / pow(b, 2);
    }
    case Op::Neg:
      return -diff(args[0], var);
    case Op::Pow: {
      const int n = e.integer();
      return Expr::constant(n) * pow(args[0], n - 1) * diff(args[0], var);
    }
    case Op::Sin:
      return cos(args[0]) * diff(args[0], var);
    case Op::Cos:
      return -sin(args[0]) * diff(args[0], var);
    case Op::Exp:
      return e * diff(args[0], var);
    case Op::Tanh:
      return (Expr::constant(1.0) - pow(e, 2)) * diff(args[0], var);
    case Op::Sqrt:
      return diff(args[0], var) / (Expr::constant(2.0) * e);
    case Op::Bump: {
      // bump(x; c, r) == mollifier(w; 0) with w = 1 - ((x - c)/r)^2
      const Expr u = (args[0] - args[1]) / args[2];
      const Expr w = Expr::constant(1.0) - pow(u, 2);
      return mollifier(w, 2) * diff(w, var);
    }
    case Op::Mollifier: {
      const Expr& w = args[0];
      const int k = e.integer();
      return (mollifier(w, k + 2) - Expr::constant(k) * mollifier(w, k + 1)) * diff(w, var);
    }
    case Op::Root: {
      const int k = e.integer();
      return Expr::constant(1.0 / k) * pow(e, 1 - k) * diff(args[0], var);
    }
  }
  return Expr();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_node(const Expr& e, const VariableBinding& b) {
  const auto args = e.args();
  switch (e.op()) {
    case Op::Constant:
      return e.value();
    case Op::Variable: {
      const auto it = b.find(e.name());
      if (it == b.end()) throw EvalError("unbound variable '" + e.name() + "'");
      return it->second;
    }
    case Op::Add: return eval_node(args[0], b) + eval_node(args[1], b);
    case Op::Sub: return eval_node(args[0], b) - eval_node(args[1], b);
    case Op::Mul: return eval_node(args[0], b) * eval_node(args[1], b);
    case Op::Div: return checked_div(eval_node(args[0], b), eval_node(args[1], b));
    case Op::Neg: return -eval_node(args[0], b);
    case Op::Pow: return checked_pow(eval_node(args[0], b), e.integer());
    case Op::Sin: return std::sin(eval_node(args[0], b));
    case Op::Cos: return std::cos(eval_node(args[0], b));
    case Op::Exp: return std::exp(eval_node(args[0], b));
    case Op::Tanh: return std::tanh(eval_node(args[0], b));
    case Op::Sqrt: return checked_sqrt(eval_node(args[0], b));
    case Op::Bump:
      return bump_value(eval_node(args[0], b), eval_node(args[1], b), eval_node(args[2], b));
    case Op::Mollifier: return mollifier_value(eval_node(args[0], b), e.integer());
    case Op::Root: return root_value(eval_node(args[0], b), e.integer());
  }
  return 0.0;
}

}  // namespace

double eval(const Expr& e, const VariableBinding& binding) {
  return finite_or_throw(eval_node(e, binding));
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::string print(const Expr& e, int min_prec);

std::string print_call(const char* name, const Expr& e) {
  std::string s = name;
  s += '(';
  s += print(e.args()[0], 0);
  s += ')';
  return s;
}

std::string print(const Expr& e, int min_prec) {
  std::string s;
  const auto args = e.args();
  switch (e.op()) {
    case Op::Constant:
      s = e.value() < 0.0 || std::signbit(e.value()) ? "(-" + format_number(-e.value()) + ")"
                                                     : format_number(e.value());
      break;
    case Op::Variable: s = e.name(); break;
    case Op::Add: s = print(args[0], 1) + " + " + print(args[1], 2); break;
    case Op::Sub: s = print(args[0], 1) + " - " + print(args[1], 2); break;
    case Op::Mul: s = print(args[0], 2) + " * " + print(args[1], 3); break;
    case Op::Div: s = print(args[0], 2) + " / " + print(args[1], 3); break;
    case Op::Neg: s = "-" + print(args[0], 3); break;
    case Op::Pow: s = print(args[0], 5) + "^" + std::to_string(e.integer()); break;
    case Op::Sin: s = print_call("sin", e); break;
    case Op::Cos: s = print_call("cos", e); break;
    case Op::Exp: s = print_call("exp", e); break;
    case Op::Tanh: s = print_call("tanh", e); break;
    case Op::Sqrt: s = print_call("sqrt", e); break;
    case Op::Bump:
      s = "bump(" + print(args[0], 0) + "; " + print(args[1], 0) + ", " + print(args[2], 0) + ")";
      break;
    case Op::Mollifier:
      s = "mollifier(" + print(args[0], 0) + "; " + std::to_string(e.integer()) + ")";
      break;
    case Op::Root:
      s = "root(" + print(args[0], 0) + "; " + std::to_string(e.integer()) + ")";
      break;
  }
  if (precedence(e) < min_prec) return "(" + s + ")";
  return s;
}

}  // namespace

std::string to_string(const Expr& e) { return print(e, 0); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view src, std::span<const std::string> vars,
         const std::map<std::string, double, std::less<>>& constants)
      : src_(src), vars_(vars), constants_(constants) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError("syntax error: " + what, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Op::Add, {lhs, term()}, 0);
      } else if (accept('-')) {
        lhs = make_node(Op::Sub, {lhs, term()}, 0);
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Op::Mul, {lhs, factor()}, 0);
      } else if (accept('/')) {
        lhs = make_node(Op::Div, {lhs, factor()}, 0);
      } else {
        return lhs;
      }
    }
  }

  Expr factor() {
    if (accept('-')) {
      Expr inner = factor();
      return inner.is_constant() ? Expr::constant(-inner.value()) : make_node(Op::Neg, {inner}, 0);
    }
    Expr b = base();
    if (accept('^')) {
      skip_ws();
      const bool negative = accept('-');
      skip_ws();
      const int n = integer_literal();
      return make_node(Op::Pow, {b}, negative ? -n : n);
    }
    return b;
  }

  int integer_literal() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer exponent");
    int n = 0;
    const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, n);
    if (ec != std::errc()) {
      pos_ = start;
      fail("integer out of range");
    }
    return n;
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t s = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return pos_ - s;
    };
    std::size_t count = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) {
        pos_ = mark;
        fail("malformed exponent");
      }
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || ptr != src_.data() + pos_ || !std::isfinite(v)) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(v);
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  Expr base() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (!ident_start(c)) fail("unexpected character '" + std::string(1, c) + "'");

    const std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    const std::string name(src_.substr(start, pos_ - start));

    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') return call(name, start);

    if (std::find(vars_.begin(), vars_.end(), name) != vars_.end()) return Expr::variable(name);
    if (const auto it = constants_.find(name); it != constants_.end()) return Expr::constant(it->second);
    if (name == "pi") return Expr::constant(std::numbers::pi);
    if (is_function(name)) {
      fail("expected '(' after function '" + name + "'");
    }
    throw UnknownVariableError(name, start);
  }

  static bool is_function(std::string_view name) {
    static constexpr std::array<std::string_view, 8> names = {"sin",  "cos",  "exp",       "tanh",
                                                              "sqrt", "bump", "mollifier", "root"};
    return std::find(names.begin(), names.end(), name) != names.end();
  }

  Expr call(const std::string& name, std::size_t name_offset) {
    if (!is_function(name)) {
      pos_ = name_offset;
      fail("unknown function '" + name + "'");
    }
    expect('(');
    Expr first = expr();
    std::vector<Expr> extra;
    if (accept(';')) {
      extra.push_back(expr());
      while (accept(',')) extra.push_back(expr());
    }
    const std::size_t close = pos_;
    expect(')');

    auto arity = [&](std::size_t n) {
      if (extra.size() != n) {
        pos_ = close;
        fail("function '" + name + "' expects " + std::to_string(n + 1) + " argument(s)");
      }
    };
    auto integer_arg = [&](const Expr& e, int min) {
      if (!e.is_constant() || std::floor(e.value()) != e.value() || e.value() < min || e.value() > 64) {
        pos_ = close;
        fail("function '" + name + "' expects an integer parameter >= " + std::to_string(min));
      }
      return static_cast<int>(e.value());
    };

    if (name == "bump") {
      arity(2);
      return make_node(Op::Bump, {first, extra[0], extra[1]}, 0);
    }
    if (name == "mollifier") {
      arity(1);
      return make_node(Op::Mollifier, {first}, integer_arg(extra[0], 0));
    }
    if (name == "root") {
      arity(1);
      return make_node(Op::Root, {first}, integer_arg(extra[0], 1));
    }
    arity(0);
    if (name == "sin") return make_node(Op::Sin, {first}, 0);
    if (name == "cos") return make_node(Op::Cos, {first}, 0);
    if (name == "exp") return make_node(Op::Exp, {first}, 0);
    if (name == "tanh") return make_node(Op::Tanh, {first}, 0);
    return make_node(Op::Sqrt, {first}, 0);
  }

  std::string_view src_;
  std::span<const std::string> vars_;
  const std::map<std::string, double, std::less<>>& constants_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view source, std::span<const std::string> allowed_vars,
                const std::map<std::string, double, std::less<>>& constants) {
  return Parser(source, allowed_vars, constants).parse();
}

// ---------------------------------------------------------------------------
// Compiled evaluation

CompiledExpr::CompiledExpr(const Expr& e, std::span<const std::string> slots) {
  int depth = 0;
  emit(e, slots, depth);
}

void CompiledExpr::emit(const Expr& e, std::span<const std::string> slots, int& depth) {
  auto push = [&](Code code, int integer = 0, double value = 0.0) {
    program_.push_back({code, integer, value});
  };
  const auto args = e.args();
  switch (e.op()) {
    case Op::Constant:
      push(Code::Const, 0, e.value());
      max_depth_ = std::max(max_depth_, ++depth);
      return;
    case Op::Variable: {
      const auto it = std::find(slots.begin(), slots.end(), e.name());
      if (it == slots.end()) throw ModelError("variable '" + e.name() + "' has no evaluation slot");
      push(Code::Var, static_cast<int>(it - slots.begin()));
      max_depth_ = std::max(max_depth_, ++depth);
      return;
    }
    default:
      break;
  }
  for (const Expr& a : args) emit(a, slots, depth);
  depth -= static_cast<int>(args.size()) - 1;
  switch (e.op()) {
    case Op::Add: push(Code::Add); break;
    case Op::Sub: push(Code::Sub); break;
    case Op::Mul: push(Code::Mul); break;
    case Op::Div: push(Code::Div); break;
    case Op::Neg: push(Code::Neg); break;
    case Op::Pow: push(Code::Pow, e.integer()); break;
    case Op::Sin: push(Code::Sin); break;
    case Op::Cos: push(Code::Cos); break;
    case Op::Exp: push(Code::Exp); break;
    case Op::Tanh: push(Code::Tanh); break;
    case Op::Sqrt: push(Code::Sqrt); break;
    case Op::Bump: push(Code::Bump); break;
    case Op::Mollifier: push(Code::Mollifier, e.integer()); break;
    case Op::Root: push(Code::Root, e.integer()); break;
    case Op::Constant:
    case Op::Variable: break;
  }
}

double CompiledExpr::operator()(std::span<const double> values) const {
  if (program_.empty()) return 0.0;
  std::array<double, 64> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (max_depth_ > static_cast<int>(small.size())) {
    large.resize(static_cast<std::size_t>(max_depth_));
    stack = large.data();
  }
  int top = -1;
  for (const Instruction& ins : program_) {
    switch (ins.code) {
      case Code::Const: stack[++top] = ins.value; break;
      case Code::Var: stack[++top] = values[static_cast<std::size_t>(ins.integer)]; break;
      case Code::Add: --top; stack[top] += stack[top + 1]; break;
      case Code::Sub: --top; stack[top] -= stack[top + 1]; break;
      case Code::Mul: --top; stack[top] *= stack[top + 1]; break;
      case Code::Div: --top; stack[top] = checked_div(stack[top], stack[top + 1]); break;
      case Code::Neg: stack[top] = -stack[top]; break;
      case Code::Pow: stack[top] = checked_pow(stack[top], ins.integer); break;
      case Code::Sin: stack[top] = std::sin(stack[top]); break;
      case Code::Cos: stack[top] = std::cos(stack[top]); break;
      case Code::Exp: stack[top] = std::exp(stack[top]); break;
      case Code::Tanh: stack[top] = std::tanh(stack[top]); break;
      case Code::Sqrt: stack[top] = checked_sqrt(stack[top]); break;
      case Code::Bump:
        top -= 2;
        stack[top] = bump_value(stack[top], stack[top + 1], stack[top + 2]);
        break;
      case Code::Mollifier: stack[top] = mollifier_value(stack[top], ins.integer); break;
      case Code::Root: stack[top] = root_value(stack[top], ins.integer); break;
    }
  }
  return finite_or_throw(stack[0]);
}

}  // namespace fqu
