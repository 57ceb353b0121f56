#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mmobs/interval.hpp"
#include "mmobs/numerics.hpp"

namespace mmobs::expr {

enum class Op { Constant, Var, Neg, Add, Sub, Mul, Div, PowInt, Sin, Cos, Exp };

/// Immutable expression tree over state variables x_0..x_{n-1}.
///
/// Nodes are shared, so copying an Expr is cheap. The static factories build
/// exactly the requested node; the free operators below fold constants and
/// drop neutral elements, which keeps derivatives readable.
class Expr {
 public:
  struct Node;

  Expr();  // Constant(0)

  static Expr constant(double v);
  static Expr var(std::size_t index);
  static Expr unary(Op op, Expr a);
  static Expr binary(Op op, Expr a, Expr b);
  static Expr pow_int(Expr a, unsigned k);

  [[nodiscard]] Op op() const;
  [[nodiscard]] double value() const;        // Constant
  [[nodiscard]] std::size_t index() const;   // Var
  [[nodiscard]] unsigned exponent() const;   // PowInt
  [[nodiscard]] const Expr& lhs() const;     // unary operand or left child
  [[nodiscard]] const Expr& rhs() const;     // right child

  [[nodiscard]] bool is_constant() const { return op() == Op::Constant; }
  [[nodiscard]] bool is_constant(double v) const { return is_constant() && value() == v; }

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  [[nodiscard]] const Node& node() const;
  std::shared_ptr<const Node> node_;  // null means Constant(0)
};

struct Expr::Node {
  Op op = Op::Constant;
  double value = 0.0;
  std::size_t index = 0;
  unsigned exponent = 0;
  Expr a;
  Expr b;
};

bool structurally_equal(const Expr& a, const Expr& b);
// Largest variable index referenced plus one (0 for constant expressions).
std::size_t var_bound(const Expr& e);
std::size_t node_count(const Expr& e);

// Folding constructors.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr pow(const Expr& a, unsigned k);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr linear_combination(const Vector& coeffs);  // sum_j c_j x_j, zero terms skipped

/// Parses the expression grammar
///   expr   := term (("+"|"-") term)*
///   term   := factor (("*"|"/") factor)*
///   factor := "-" factor | atom ("^" uint)?
///   atom   := number | ident | func "(" expr ")" | "(" expr ")"
/// Identifiers resolve to state names first, then to `params` (substituted as constants).
Expr parse(std::string_view text, const std::vector<std::string>& state_names,
           const std::map<std::string, double, std::less<>>& params = {});

// Fully parenthesized form that parses back to the same tree (for trees
// whose constants are nonnegative, which is everything the parser produces).
std::string print(const Expr& e, const std::vector<std::string>& state_names);

double eval(const Expr& e, const Vector& x);
Expr differentiate(const Expr& e, std::size_t var);
Expr substitute(const Expr& e, const std::vector<Expr>& replacement);

Interval interval_eval(const Expr& e, const Box& box);

// Entry (i, j) encloses d es[i] / d x_j over the box.
IntervalMatrix jacobian_bounds(const std::vector<Expr>& es, const Box& box);

/// Postfix program for repeated point evaluation in the simulation loops.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e);

  // Same semantics and errors as eval().
  [[nodiscard]] double operator()(const double* x) const;
  [[nodiscard]] double operator()(const Vector& x) const { return (*this)(x.data()); }
  [[nodiscard]] std::size_t size() const { return code_.size(); }

 private:
  struct Instr {
    Op op;
    double value;
    std::size_t index;
    unsigned exponent;
  };
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
};

}  // namespace mmobs::expr
