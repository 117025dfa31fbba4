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

// Real-valued coefficient fields: an immutable arithmetic tree with exact
// symbolic differentiation.
//
// Grammar accepted by parse_expr (whitespace insignificant):
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | base ('^' ['-'] integer)?
//   base   := number | ident | '(' expr ')'
//           | func '(' expr (';' expr (',' expr)*)? ')'
//
// Functions: sin cos exp tanh sqrt, bump(x; c, r), mollifier(w; k), root(x; k).
// `pi` is always defined.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fqu {

enum class Op : std::uint8_t {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,  // integer exponent
  Sin,
  Cos,
  Exp,
  Tanh,
  Sqrt,
  Bump,       // bump(x; c, r) = exp(1 - 1/(1-u^2)), u = (x-c)/r, zero for |u| >= 1
  Mollifier,  // mollifier(w; k) = exp(1 - 1/w) * w^-k for w > 0, else 0
  Root,       // root(x; k) = x^(1/k), x >= 0
};

using VariableBinding = std::map<std::string, double, std::less<>>;

class Expr {
 public:
  /// The zero constant.
  Expr();

  static Expr constant(double value);
  static Expr variable(std::string name);

  Op op() const noexcept;
  /// Constant value; only meaningful for Op::Constant.
  double value() const noexcept;
  /// Variable name; only meaningful for Op::Variable.
  const std::string& name() const noexcept;
  /// Integer parameter of Pow, Mollifier and Root.
  int integer() const noexcept;
  std::span<const Expr> args() const noexcept;

  bool is_constant() const noexcept { return op() == Op::Constant; }
  bool is_zero() const noexcept { return is_constant() && value() == 0.0; }
  bool is_one() const noexcept { return is_constant() && value() == 1.0; }

  /// True when both trees are structurally identical.
  bool same_as(const Expr& other) const;

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  friend Expr make_node(Op, std::vector<Expr>, int);
  std::shared_ptr<const Node> node_;
};

// Smart constructors. They fold constants and apply the 0/1 identities only.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& x);
Expr cos(const Expr& x);
Expr exp(const Expr& x);
Expr tanh(const Expr& x);
Expr sqrt(const Expr& x);
Expr bump(const Expr& x, const Expr& center, const Expr& radius);
Expr mollifier(const Expr& w, int order);
Expr root(const Expr& x, int degree);

/// Parses `source`; every identifier must be in `allowed_vars` or `constants`.
Expr parse_expr(std::string_view source, std::span<const std::string> allowed_vars,
                const std::map<std::string, double, std::less<>>& constants = {});

/// Exact symbolic derivative with respect to `var`.
Expr diff(const Expr& e, std::string_view var);

/// Evaluates `e`. Throws EvalError on an unbound variable or a non-finite result.
double eval(const Expr& e, const VariableBinding& binding);

std::set<std::string> free_variables(const Expr& e);
bool depends_on(const Expr& e, std::string_view var);

/// Replaces every occurrence of `var` by `replacement`.
Expr substitute(const Expr& e, std::string_view var, const Expr& replacement);

/// Prints in the grammar above; parse(to_string(e)) evaluates identically.
std::string to_string(const Expr& e);

/// Flattened evaluator with variables resolved to positional slots. Used on
/// hot paths (grid sampling, classical integration).
class CompiledExpr {
 public:
  CompiledExpr() = default;
  /// Throws ModelError if `e` has a free variable not listed in `slots`.
  CompiledExpr(const Expr& e, std::span<const std::string> slots);

  double operator()(std::span<const double> values) const;
  bool is_constant() const noexcept { return program_.size() == 1 && program_[0].code == Code::Const; }

 private:
  enum class Code : std::uint8_t {
    Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Tanh, Sqrt, Bump, Mollifier, Root
  };
  struct Instruction {
    Code code;
    int integer;
    double value;
  };
  void emit(const Expr& e, std::span<const std::string> slots, int& depth);

  std::vector<Instruction> program_;
  int max_depth_ = 0;
};

}  // namespace fqu
