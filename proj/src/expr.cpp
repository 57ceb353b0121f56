#include "mmobs/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "mmobs/error.hpp"

namespace mmobs::expr {

namespace {

const Expr::Node& zero_node() {
  static const Expr::Node node;
  return node;
}

double check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::NonFiniteResult, std::string(what) + " produced a non-finite value");
  }
  return v;
}

double apply_unary(Op op, double a) {
  switch (op) {
    case Op::Neg: return -a;
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Exp: return check_finite(std::exp(a), "exp");
    default: break;
  }
  throw Error(ErrorKind::IllFormedProblem, "not a unary operator");
}

double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return check_finite(a + b, "addition");
    case Op::Sub: return check_finite(a - b, "subtraction");
    case Op::Mul: return check_finite(a * b, "multiplication");
    case Op::Div:
      if (b == 0.0) throw Error(ErrorKind::DivisionByZero, "denominator evaluated to zero");
      return check_finite(a / b, "division");
    default: break;
  }
  throw Error(ErrorKind::IllFormedProblem, "not a binary operator");
}

double apply_pow(double a, unsigned k) {
  return check_finite(std::pow(a, static_cast<double>(k)), "integer power");
}

bool is_unary(Op op) { return op == Op::Neg || op == Op::Sin || op == Op::Cos || op == Op::Exp; }
bool is_binary(Op op) { return op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div; }

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& states,
         const std::map<std::string, double, std::less<>>& params)
      : text_(text), states_(states), params_(params) {}

  Expr run() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) {
      fail("operator or end of input", "unexpected '" + std::string(1, text_[pos_]) + "'");
    }
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& expected, const std::string& detail) const {
    throw SyntaxError(pos_, expected, detail);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      fail(std::string("'") + c + "'", pos_ >= text_.size() ? "end of input" : "unexpected character");
    }
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(Op::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = Expr::binary(Op::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Op::Mul, lhs, parse_factor());
      } else if (accept('/')) {
        lhs = Expr::binary(Op::Div, lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_factor() {
    if (accept('-')) {
      return Expr::unary(Op::Neg, parse_factor());
    }
    Expr base = parse_atom();
    if (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("unsigned integer exponent", "missing exponent");
      unsigned k = 0;
      const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, k);
      if (res.ec != std::errc{}) fail("unsigned integer exponent", "exponent out of range");
      return Expr::pow_int(base, k);
    }
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("number, identifier, function or '('", "end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("number, identifier, function or '('", "unexpected '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t s = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return pos_ - s;
    };
    std::size_t nd = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) fail("digit", "malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("exponent digits", "malformed number");
    }
    const std::string lit(text_.substr(start, pos_ - start));
    const double v = std::strtod(lit.c_str(), nullptr);
    if (!std::isfinite(v)) fail("finite number", "number out of range");
    return Expr::constant(v);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "sin" || name == "cos" || name == "exp") {
      const Op op = name == "sin" ? Op::Sin : name == "cos" ? Op::Cos : Op::Exp;
      expect('(');
      Expr arg = parse_expr();
      expect(')');
      return Expr::unary(op, arg);
    }
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (states_[i] == name) return Expr::var(i);
    }
    if (const auto it = params_.find(name); it != params_.end()) {
      return Expr::constant(it->second);
    }
    throw Error(ErrorKind::UnknownIdentifier,
                "'" + std::string(name) + "' at position " + std::to_string(start) + " is not a state or parameter");
  }

  std::string_view text_;
  const std::vector<std::string>& states_;
  const std::map<std::string, double, std::less<>>& params_;
  std::size_t pos_ = 0;
};

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_into(const Expr& e, const std::vector<std::string>& names, std::string& out) {
  switch (e.op()) {
    case Op::Constant:
      if (e.value() < 0.0 || std::signbit(e.value())) {
        out += "(-" + format_number(-e.value()) + ")";
      } else {
        out += format_number(e.value());
      }
      return;
    case Op::Var:
      out += e.index() < names.size() ? names[e.index()] : "x" + std::to_string(e.index() + 1);
      return;
    case Op::Neg:
      out += "(-";
      print_into(e.lhs(), names, out);
      out += ")";
      return;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
      out += e.op() == Op::Sin ? "sin(" : e.op() == Op::Cos ? "cos(" : "exp(";
      print_into(e.lhs(), names, out);
      out += ")";
      return;
    case Op::PowInt: {
      const Op base = e.lhs().op();
      const bool bare = base == Op::Var || (base == Op::Constant && e.lhs().value() >= 0.0) || base == Op::Sin ||
                        base == Op::Cos || base == Op::Exp;
      if (!bare) out += "(";
      print_into(e.lhs(), names, out);
      if (!bare) out += ")";
      out += "^" + std::to_string(e.exponent());
      return;
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const char sym = e.op() == Op::Add ? '+' : e.op() == Op::Sub ? '-' : e.op() == Op::Mul ? '*' : '/';
      out += "(";
      print_into(e.lhs(), names, out);
      out += ' ';
      out += sym;
      out += ' ';
      print_into(e.rhs(), names, out);
      out += ")";
      return;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Expr

Expr::Expr() = default;

Expr Expr::constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::var(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->index = index;
  return Expr(std::move(n));
}

Expr Expr::unary(Op op, Expr a) {
  if (!is_unary(op)) throw Error(ErrorKind::IllFormedProblem, "Expr::unary with non-unary op");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr a, Expr b) {
  if (!is_binary(op)) throw Error(ErrorKind::IllFormedProblem, "Expr::binary with non-binary op");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return Expr(std::move(n));
}

Expr Expr::pow_int(Expr a, unsigned k) {
  auto n = std::make_shared<Node>();
  n->op = Op::PowInt;
  n->exponent = k;
  n->a = std::move(a);
  return Expr(std::move(n));
}

const Expr::Node& Expr::node() const { return node_ ? *node_ : zero_node(); }

Op Expr::op() const { return node().op; }
double Expr::value() const { return node().value; }
std::size_t Expr::index() const { return node().index; }
unsigned Expr::exponent() const { return node().exponent; }
const Expr& Expr::lhs() const { return node().a; }
const Expr& Expr::rhs() const { return node().b; }

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Constant: return a.value() == b.value();
    case Op::Var: return a.index() == b.index();
    case Op::PowInt: return a.exponent() == b.exponent() && structurally_equal(a.lhs(), b.lhs());
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp: return structurally_equal(a.lhs(), b.lhs());
    default: return structurally_equal(a.lhs(), b.lhs()) && structurally_equal(a.rhs(), b.rhs());
  }
}

std::size_t var_bound(const Expr& e) {
  switch (e.op()) {
    case Op::Constant: return 0;
    case Op::Var: return e.index() + 1;
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::PowInt: return var_bound(e.lhs());
    default: return std::max(var_bound(e.lhs()), var_bound(e.rhs()));
  }
}

std::size_t node_count(const Expr& e) {
  switch (e.op()) {
    case Op::Constant:
    case Op::Var: return 1;
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::PowInt: return 1 + node_count(e.lhs());
    default: return 1 + node_count(e.lhs()) + node_count(e.rhs());
  }
}

// ---------------------------------------------------------------------------
// Folding constructors

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() + b.value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  if (b.op() == Op::Neg) return a - b.lhs();
  return Expr::binary(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() - b.value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return Expr::binary(Op::Sub, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  if (a.op() == Op::Neg) return a.lhs();
  return Expr::unary(Op::Neg, a);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() * b.value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return Expr::binary(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) return Expr::constant(a.value() / b.value());
  if (b.is_constant(1.0)) return a;
  return Expr::binary(Op::Div, a, b);
}

Expr pow(const Expr& a, unsigned k) {
  if (k == 0) return Expr::constant(1.0);
  if (k == 1) return a;
  if (a.is_constant()) return Expr::constant(std::pow(a.value(), static_cast<double>(k)));
  return Expr::pow_int(a, k);
}

Expr sin(const Expr& a) { return a.is_constant() ? Expr::constant(std::sin(a.value())) : Expr::unary(Op::Sin, a); }
Expr cos(const Expr& a) { return a.is_constant() ? Expr::constant(std::cos(a.value())) : Expr::unary(Op::Cos, a); }
Expr exp(const Expr& a) { return a.is_constant() ? Expr::constant(std::exp(a.value())) : Expr::unary(Op::Exp, a); }

Expr linear_combination(const Vector& coeffs) {
  Expr acc = Expr::constant(0.0);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] == 0.0) continue;
    acc = acc + Expr::constant(coeffs[j]) * Expr::var(j);
  }
  return acc;
}

// ---------------------------------------------------------------------------

Expr parse(std::string_view text, const std::vector<std::string>& state_names,
           const std::map<std::string, double, std::less<>>& params) {
  return Parser(text, state_names, params).run();
}

std::string print(const Expr& e, const std::vector<std::string>& state_names) {
  std::string out;
  print_into(e, state_names, out);
  return out;
}

double eval(const Expr& e, const Vector& x) {
  switch (e.op()) {
    case Op::Constant: return e.value();
    case Op::Var:
      if (e.index() >= x.size()) throw Error(ErrorKind::DimensionMismatch, "variable index beyond point dimension");
      return x[e.index()];
    case Op::PowInt: return apply_pow(eval(e.lhs(), x), e.exponent());
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp: return apply_unary(e.op(), eval(e.lhs(), x));
    default: return apply_binary(e.op(), eval(e.lhs(), x), eval(e.rhs(), x));
  }
}

Expr differentiate(const Expr& e, std::size_t var) {
  switch (e.op()) {
    case Op::Constant: return Expr::constant(0.0);
    case Op::Var: return Expr::constant(e.index() == var ? 1.0 : 0.0);
    case Op::Neg: return -differentiate(e.lhs(), var);
    case Op::Add: return differentiate(e.lhs(), var) + differentiate(e.rhs(), var);
    case Op::Sub: return differentiate(e.lhs(), var) - differentiate(e.rhs(), var);
    case Op::Mul:
      return differentiate(e.lhs(), var) * e.rhs() + e.lhs() * differentiate(e.rhs(), var);
    case Op::Div: {
      const Expr& num = e.lhs();
      const Expr& den = e.rhs();
      const Expr dnum = differentiate(num, var);
      const Expr dden = differentiate(den, var);
      if (dden.is_constant(0.0)) return dnum / den;
      return (dnum * den - num * dden) / pow(den, 2);
    }
    case Op::PowInt: {
      const unsigned k = e.exponent();
      if (k == 0) return Expr::constant(0.0);
      return Expr::constant(static_cast<double>(k)) * pow(e.lhs(), k - 1) * differentiate(e.lhs(), var);
    }
    case Op::Sin: return cos(e.lhs()) * differentiate(e.lhs(), var);
    case Op::Cos: return -(sin(e.lhs()) * differentiate(e.lhs(), var));
    case Op::Exp: return exp(e.lhs()) * differentiate(e.lhs(), var);
  }
  return Expr::constant(0.0);
}

Expr substitute(const Expr& e, const std::vector<Expr>& replacement) {
  switch (e.op()) {
    case Op::Constant: return e;
    case Op::Var:
      if (e.index() >= replacement.size()) {
        throw Error(ErrorKind::DimensionMismatch, "substitution does not cover every variable");
      }
      return replacement[e.index()];
    case Op::Neg: return -substitute(e.lhs(), replacement);
    case Op::Add: return substitute(e.lhs(), replacement) + substitute(e.rhs(), replacement);
    case Op::Sub: return substitute(e.lhs(), replacement) - substitute(e.rhs(), replacement);
    case Op::Mul: return substitute(e.lhs(), replacement) * substitute(e.rhs(), replacement);
    case Op::Div: return substitute(e.lhs(), replacement) / substitute(e.rhs(), replacement);
    case Op::PowInt: return pow(substitute(e.lhs(), replacement), e.exponent());
    case Op::Sin: return sin(substitute(e.lhs(), replacement));
    case Op::Cos: return cos(substitute(e.lhs(), replacement));
    case Op::Exp: return exp(substitute(e.lhs(), replacement));
  }
  return e;
}

Interval interval_eval(const Expr& e, const Box& box) {
  switch (e.op()) {
    case Op::Constant: return Interval::point(e.value());
    case Op::Var:
      if (e.index() >= box.dim()) throw Error(ErrorKind::DimensionMismatch, "variable index beyond box dimension");
      return box[e.index()];
    case Op::Neg: return -interval_eval(e.lhs(), box);
    case Op::Add: return interval_eval(e.lhs(), box) + interval_eval(e.rhs(), box);
    case Op::Sub: return interval_eval(e.lhs(), box) - interval_eval(e.rhs(), box);
    case Op::Mul: return interval_eval(e.lhs(), box) * interval_eval(e.rhs(), box);
    case Op::Div: return interval_eval(e.lhs(), box) / interval_eval(e.rhs(), box);
    case Op::PowInt: return pow_int(interval_eval(e.lhs(), box), e.exponent());
    case Op::Sin: return sin(interval_eval(e.lhs(), box));
    case Op::Cos: return cos(interval_eval(e.lhs(), box));
    case Op::Exp: return exp(interval_eval(e.lhs(), box));
  }
  return {};
}

IntervalMatrix jacobian_bounds(const std::vector<Expr>& es, const Box& box) {
  const std::size_t p = es.size();
  const std::size_t n = box.dim();
  Matrix lo(p, n);
  Matrix hi(p, n);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Interval d = interval_eval(differentiate(es[i], j), box);
      lo(i, j) = d.lo;
      hi(i, j) = d.hi;
    }
  }
  return {std::move(lo), std::move(hi)};
}

// ---------------------------------------------------------------------------
// CompiledExpr

CompiledExpr::CompiledExpr(const Expr& e) {
  std::size_t depth = 0;
  auto emit = [&](auto&& self, const Expr& node) -> void {
    switch (node.op()) {
      case Op::Constant:
      case Op::Var:
        code_.push_back({node.op(), node.value(), node.index(), 0});
        ++depth;
        max_depth_ = std::max(max_depth_, depth);
        return;
      case Op::Neg:
      case Op::Sin:
      case Op::Cos:
      case Op::Exp:
      case Op::PowInt:
        self(self, node.lhs());
        code_.push_back({node.op(), 0.0, 0, node.exponent()});
        return;
      default:
        self(self, node.lhs());
        self(self, node.rhs());
        code_.push_back({node.op(), 0.0, 0, 0});
        --depth;
        return;
    }
  };
  emit(emit, e);
}

double CompiledExpr::operator()(const double* x) const {
  constexpr std::size_t kInline = 64;
  double inline_stack[kInline];
  std::vector<double> heap;
  double* stack = inline_stack;
  if (max_depth_ > kInline) {
    heap.resize(max_depth_);
    stack = heap.data();
  }
  std::size_t top = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Constant: stack[top++] = in.value; break;
      case Op::Var: stack[top++] = x[in.index]; break;
      case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
      case Op::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
      case Op::Exp: stack[top - 1] = apply_unary(Op::Exp, stack[top - 1]); break;
      case Op::PowInt: stack[top - 1] = apply_pow(stack[top - 1], in.exponent); break;
      default:
        --top;
        stack[top - 1] = apply_binary(in.op, stack[top - 1], stack[top]);
        break;
    }
  }
  return code_.empty() ? 0.0 : stack[0];
}

}  // namespace mmobs::expr
