#include <gtest/gtest.h>

#include "mmobs/embed.hpp"
#include "mmobs/error.hpp"
#include "mmobs/system.hpp"
#include "support/oracles.hpp"

using namespace mmobs;
using namespace mmobs::embed;

namespace {

struct Henon {
  WorkingSystem work = prepare(resolve_system("henon_dt"));
  Splits splits = split_system(work);
  sim::Plant plant = build_plant(work);

  ObserverSystem observer(const Matrix& gain) const { return build_observer(work, splits, gain); }
};

const Matrix kReferenceGain{{0.0393}, {0.0346}};

}  // namespace

TEST(LinearUpDown, DiscreteAndContinuous) {
  auto [up, down] = linear_updown(Matrix{{1, -2}, {0, 1}}, TimeDomain::DT);
  EXPECT_EQ(up, (Matrix{{1, 0}, {0, 1}}));
  EXPECT_EQ(down, (Matrix{{0, 2}, {0, 0}}));
  auto [cu, cd] = linear_updown(Matrix{{-1, -2}, {3, -4}}, TimeDomain::CT);
  EXPECT_EQ(cu, (Matrix{{-1, 0}, {3, -4}}));
  EXPECT_EQ(cd, (Matrix{{0, 2}, {0, 0}}));
  const Matrix nn{{0.5, 1}, {2, 0}};
  auto [pu, pd] = linear_updown(nn, TimeDomain::DT);
  EXPECT_EQ(pu, nn);
  EXPECT_EQ(pd, Matrix(2, 2));
}

TEST(LinearEmbed, HandValuesAndDiagonal) {
  const Matrix m{{1, -2}, {0, 1}};
  EXPECT_EQ(linear_embed_eval(m, TimeDomain::DT, {1, 1}, {0, 0}), (Vector{1, 1}));
  EXPECT_EQ(linear_embed_eval(m, TimeDomain::DT, {1, 1}, {1, 1}), (Vector{-1, 1}));
  mmobs::testing::Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    const Matrix a = mmobs::testing::random_matrix(rng, 3, 3);
    const Vector x = mmobs::testing::uniform_point(rng, Box({-1, -1, -1}, {1, 1, 1}));
    for (auto t : {TimeDomain::CT, TimeDomain::DT}) {
      const Vector got = linear_embed_eval(a, t, x, x);
      const Vector want = a * x;
      for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got[i], want[i], 1e-14);
    }
  }
}

TEST(NonlinearEmbed, ScalarSignBookkeeping) {
  const Box dom({-5}, {5});
  const decomp::JssSplit phi({expr::Expr()}, Matrix(1, 1), dom, IntervalMatrix(Matrix(1, 1), Matrix(1, 1)),
                             IntervalMatrix(Matrix(1, 1), Matrix(1, 1)), {{false}});
  const decomp::JssSplit psi({expr::parse("-x", {"x"})}, Matrix(1, 1), dom,
                             IntervalMatrix(Matrix{{-1}}, Matrix{{-1}}), IntervalMatrix(Matrix{{-1}}, Matrix{{-1}}),
                             {{false}});
  for (double x1 : {-1.0, 0.5, 2.0})
    for (double x2 : {-3.0, 1.0}) EXPECT_DOUBLE_EQ(nonlinear_embed_eval(phi, psi, Matrix{{2}}, {x1}, {x2})[0], 2 * x1);
  EXPECT_DOUBLE_EQ(nonlinear_embed_eval(phi, psi, Matrix{{0}}, {1}, {2})[0], 0.0);
}

TEST(NonlinearEmbed, ZeroGainReducesToPhi) {
  const Henon h;
  const Vector x1{1.5, 0.5}, x2{-0.5, -0.2};
  const Vector got = nonlinear_embed_eval(h.splits.phi, h.splits.psi, Matrix(2, 1), x1, x2);
  EXPECT_EQ(got, decomp::tight_decomp_eval(h.splits.phi, x1, x2));
}

TEST(ObserverRhs, CollapsesToPlantOnDegenerateBox) {
  const Henon h;
  const ObserverSystem obs = h.observer(kReferenceGain);
  mmobs::testing::Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    const Vector x = mmobs::testing::uniform_point(rng, h.work.domain);
    const Increment inc = observer_rhs(obs, EmbeddingState(x, x), h.plant.h(x));
    const Vector fx = h.plant.f(x);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(inc.upper[i], fx[i], 1e-14);
      EXPECT_NEAR(inc.lower[i], fx[i], 1e-14);
    }
  }
}

TEST(ObserverRhs, ZeroGainFramesImageOfInitialBox) {
  const Henon h;
  const ObserverSystem obs = h.observer(Matrix(2, 1));
  const Box x0 = h.work.x0;
  const Increment inc = observer_rhs(obs, EmbeddingState(x0.hi, x0.lo), {0.0});
  for (int a = 0; a <= 100; ++a)
    for (int b = 0; b <= 100; ++b) {
      const Vector x{x0.lo[0] + a * (x0.hi[0] - x0.lo[0]) / 100, x0.lo[1] + b * (x0.hi[1] - x0.lo[1]) / 100};
      const Vector fx = h.plant.f(x);
      for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_LE(fx[i], inc.upper[i] + 1e-12);
        EXPECT_GE(fx[i], inc.lower[i] - 1e-12);
      }
    }
}

TEST(ObserverRhs, ReferenceGainStepContainsImageOfOrigin) {
  const Henon h;
  const ObserverSystem obs = h.observer(kReferenceGain);
  const Vector x{0, 0};
  const Increment inc = observer_rhs(obs, EmbeddingState(h.work.x0.hi, h.work.x0.lo), h.plant.h(x));
  const Vector fx{0.05, 0.0};
  EXPECT_EQ(h.plant.f(x), fx);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_LE(inc.lower[i], fx[i]);
    EXPECT_GE(inc.upper[i], fx[i]);
  }
}

TEST(EmbeddingState, RejectsReversedFramers) {
  try {
    EmbeddingState({0, 1}, {0, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OrderingViolation);
  }
}
