#include <gtest/gtest.h>

#include <cmath>

#include "mmobs/error.hpp"
#include "mmobs/expr.hpp"
#include "support/oracles.hpp"

using namespace mmobs;
using namespace mmobs::expr;

namespace {

const std::vector<std::string> kStates{"x1", "x2"};

Expr p(const std::string& s) { return parse(s, kStates); }

}  // namespace

TEST(Parse, HenonRowTree) {
  const Expr e = p("x2 + 0.05*(1 - x1^2)");
  const Expr want = Expr::binary(
      Op::Add, Expr::var(1),
      Expr::binary(Op::Mul, Expr::constant(0.05),
                   Expr::binary(Op::Sub, Expr::constant(1), Expr::pow_int(Expr::var(0), 2))));
  EXPECT_TRUE(structurally_equal(e, want)) << print(e, kStates);
}

TEST(Parse, SingleIdentifier) { EXPECT_TRUE(structurally_equal(p("x1"), Expr::var(0))); }

TEST(Parse, UnbalancedParenthesisReportsEndOfInput) {
  try {
    p("sin(x1");
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.position(), 6U);
  }
}

TEST(Parse, UnknownIdentifier) {
  try {
    p("x1 + y");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownIdentifier);
  }
}

TEST(Parse, ParametersBecomeConstants) {
  const std::map<std::string, double, std::less<>> params{{"r1", 0.05}};
  const Expr e = parse("x2 + r1*(1 - x1^2)", kStates, params);
  EXPECT_TRUE(structurally_equal(e, p("x2 + 0.05*(1 - x1^2)")));
}

TEST(Parse, PrintRoundTrip) {
  for (const char* s : {"x2 + 0.05*(1 - x1^2)", "-x1*x2", "sin(x1)/(2 + cos(x2))", "exp(-x1^3) - x2 - 1"}) {
    const Expr e = p(s);
    EXPECT_TRUE(structurally_equal(parse(print(e, kStates), kStates), e)) << s;
  }
}

TEST(Eval, HandValues) {
  EXPECT_DOUBLE_EQ(eval(p("0.3*x1"), {2, -1}), 0.6);
  EXPECT_DOUBLE_EQ(eval(p("x2 + 0.05*(1 - x1^2)"), {2, 1}), 0.85);
  EXPECT_DOUBLE_EQ(eval(p("sin(x1)"), {0, 5}), 0.0);
}

TEST(Eval, Errors) {
  try {
    eval(p("x1/x2"), {1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DivisionByZero);
  }
  try {
    eval(p("exp(x1)"), {1000, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteResult);
  }
}

TEST(Eval, CompiledMatchesTreeEvaluation) {
  mmobs::testing::Rng rng(5);
  mmobs::testing::ExprGenerator gen(rng, 2);
  for (int i = 0; i < 200; ++i) {
    const Expr e = gen(4);
    const CompiledExpr c(e);
    const Vector x{mmobs::testing::uniform(rng, -2, 2), mmobs::testing::uniform(rng, -2, 2)};
    EXPECT_EQ(c(x), eval(e, x));
  }
}

TEST(Differentiate, HandDerivatives) {
  const Expr d1 = differentiate(p("x2 + 0.05*(1 - x1^2)"), 0);
  for (double x : {-2.0, 0.3, 1.7}) EXPECT_NEAR(eval(d1, {x, 9}), -0.1 * x, 1e-15);
  EXPECT_TRUE(differentiate(p("x2 + 0.05*(1 - x1^2)"), 1).is_constant(1.0));
  const Expr d3 = differentiate(p("cos(x1)*x2"), 0);
  EXPECT_NEAR(eval(d3, {0.7, 2.0}), -std::sin(0.7) * 2.0, 1e-15);
}

TEST(Differentiate, AgreesWithCentralDifferences) {
  mmobs::testing::Rng rng(9);
  mmobs::testing::ExprGenerator gen(rng, 3);
  for (int i = 0; i < 100; ++i) {
    const Expr e = gen(3);
    Vector x{mmobs::testing::uniform(rng, -1, 1), mmobs::testing::uniform(rng, -1, 1),
             mmobs::testing::uniform(rng, -1, 1)};
    for (std::size_t j = 0; j < 3; ++j) {
      const double h = 1e-5;
      Vector xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const double fd = (eval(e, xp) - eval(e, xm)) / (2 * h);
      EXPECT_NEAR(eval(differentiate(e, j), x), fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(IntervalEval, HandRanges) {
  const Interval s = interval_eval(parse("sin(x1)", {"x1"}), Box({0.0}, {M_PI}));
  EXPECT_NEAR(s.lo, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.hi, 1.0);
  const Interval l = interval_eval(parse("-0.1*x1", {"x1"}), Box({-2.0}, {2.0}));
  EXPECT_NEAR(l.lo, -0.2, 1e-15);
  EXPECT_NEAR(l.hi, 0.2, 1e-15);
  const Interval c = interval_eval(p("3"), Box({-5.0, 1.0}, {5.0, 2.0}));
  EXPECT_EQ(c, Interval(3, 3));
}

TEST(IntervalEval, EnclosesSampledValues) {
  mmobs::testing::Rng rng(13);
  mmobs::testing::ExprGenerator gen(rng, 2);
  for (int i = 0; i < 100; ++i) {
    const Expr e = gen(4);
    const Box b = mmobs::testing::random_box(rng, 2);
    const Interval r = interval_eval(e, b);
    for (int k = 0; k < 50; ++k) {
      const double v = eval(e, mmobs::testing::uniform_point(rng, b));
      EXPECT_TRUE(r.contains(v, 1e-12 * std::max(1.0, std::abs(v))));
    }
  }
}

TEST(JacobianBounds, HenonMap) {
  const std::vector<Expr> f{p("x2 + 0.05*(1 - x1^2)"), p("0.3*x1")};
  const IntervalMatrix j = jacobian_bounds(f, Box({-2, -1}, {2, 1}));
  const Matrix lo{{-0.2, 1}, {0.3, 0}}, hi{{0.2, 1}, {0.3, 0}};
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      EXPECT_NEAR(j.lo(r, c), lo(r, c), 1e-15);
      EXPECT_NEAR(j.hi(r, c), hi(r, c), 1e-15);
    }
}

TEST(JacobianBounds, LinearAndSine) {
  const Matrix a{{1, -2}, {0.5, 3}};
  const IntervalMatrix j = jacobian_bounds({linear_combination(a.row_vector(0)), linear_combination(a.row_vector(1))},
                                           Box({-1, -1}, {1, 1}));
  EXPECT_EQ(j.lo, a);
  EXPECT_EQ(j.hi, a);
  const IntervalMatrix s = jacobian_bounds({parse("sin(x1)", {"x1"})}, Box({-M_PI / 2}, {M_PI / 2}));
  EXPECT_NEAR(s.lo(0, 0), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.hi(0, 0), 1.0);
}

TEST(Substitute, ComposesWithLinearMap) {
  const Expr e = p("x1*x2");
  const Expr sub = substitute(e, {p("x1 + x2"), p("x1 - x2")});
  for (double a : {-1.0, 0.5})
    for (double b : {2.0, -0.25}) EXPECT_NEAR(eval(sub, {a, b}), (a + b) * (a - b), 1e-15);
}
