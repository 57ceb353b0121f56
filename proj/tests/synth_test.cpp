#include <gtest/gtest.h>

#include <algorithm>

#include "mmobs/error.hpp"
#include "mmobs/synth.hpp"
#include "mmobs/system.hpp"
#include "support/oracles.hpp"

using namespace mmobs;
using namespace mmobs::synth;

namespace {

std::size_t count_labels(const sdp::LmiProblem& p, const std::string& prefix) {
  return std::count_if(p.ineqs.begin(), p.ineqs.end(),
                       [&](const sdp::LinIneq& q) { return q.label.rfind(prefix, 0) == 0; });
}

Design henon_design() {
  const WorkingSystem w = prepare(resolve_system("henon_dt"));
  const Splits s = split_system(w);
  return make_design(w.time, s.phi, s.psi);
}

Design scalar(TimeDomain t, double a, double c, double fphi = 0.0, double fpsi = 0.0) {
  return {t, Matrix{{a}}, Matrix{{c}}, Matrix{{fphi}}, Matrix{{fpsi}}};
}

}  // namespace

TEST(AssembleCt, ShapesForTwoStatesOneOutput) {
  const Matrix a{{-1, 0.5}, {0.2, -2}}, c{{1, 0}}, f(2, 2), fp(1, 2);
  const sdp::LmiProblem p = assemble_ct_lmi(a, c, f, fp, 0.1, 1e-6);
  EXPECT_EQ(p.nvars, 3U + 2U + 2U);
  ASSERT_EQ(p.blocks.size(), 2U);
  EXPECT_EQ(p.blocks[0].size(), 2U);
  EXPECT_EQ(p.blocks[1].size(), 4U);
  EXPECT_EQ(count_labels(p, "J["), 2U);
  EXPECT_EQ(count_labels(p, "(J^T C)"), 2U);
  EXPECT_NO_THROW(p.validate());
}

TEST(AssembleCt, MainBlockIsSymmetricForRandomData) {
  mmobs::testing::Rng rng(31);
  for (int k = 0; k < 20; ++k) {
    const Matrix a = mmobs::testing::random_matrix(rng, 3, 3);
    const Matrix c = mmobs::testing::random_matrix(rng, 2, 3);
    const Matrix f = pos_part(mmobs::testing::random_matrix(rng, 3, 3));
    const Matrix fp = pos_part(mmobs::testing::random_matrix(rng, 2, 3));
    EXPECT_NO_THROW(assemble_ct_lmi(a, c, f, fp, 0.5, 1e-6).validate());
  }
}

TEST(AssembleCt, ScalarBlockValue) {
  const double delta = 1e-6;
  const sdp::LmiProblem p = assemble_ct_lmi(Matrix{{-1}}, Matrix{{1}}, Matrix{{0}}, Matrix{{0}}, 0.1, delta);
  const VarLayout layout{TimeDomain::CT, 1, 1, std::nullopt};
  const Vector v = layout.encode(Matrix{{1}}, Matrix{{1}}, Matrix{{0}});
  const Matrix main = p.blocks[1].value(v);
  EXPECT_NEAR(main(0, 0), -2 + delta, 1e-15);
  EXPECT_NEAR(main(0, 1), 0.9, 1e-15);
  EXPECT_NEAR(main(1, 1), -0.2 + delta, 1e-15);
  EXPECT_GT(max_eigenvalue(main), 0.0);
  const SynthesisResult r = synthesize(scalar(TimeDomain::CT, -1, 1));
  EXPECT_TRUE(sdp::check(r.problem, r.point).passed());
}

TEST(AssembleDt, ShapesAndHandFeasiblePoint) {
  const Design h = henon_design();
  const sdp::LmiProblem ph = assemble_dt_lmi(h.a, h.c, h.fphi, h.fpsi, 1e-6);
  EXPECT_EQ(ph.blocks[1].size(), 4U);
  EXPECT_EQ(ph.nvars, 3U + 4U + 2U);
  EXPECT_EQ(count_labels(ph, "X["), 2U);

  const double delta = 1e-6;
  const Design d = scalar(TimeDomain::DT, 0.5, 1.0);
  const sdp::LmiProblem p = assemble_dt_lmi(d.a, d.c, d.fphi, d.fpsi, delta);
  const VarLayout layout{TimeDomain::DT, 1, 1, std::nullopt};
  const Vector v = layout.encode(Matrix{{0.9}}, Matrix{{1}}, Matrix{{0}});
  const Matrix main = p.blocks[1].value(v);
  EXPECT_NEAR(main(0, 0), -0.9 + delta, 1e-15);
  EXPECT_NEAR(main(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(main(1, 1), -1.1 + delta, 1e-15);

  const VerifyReport rep = verify_solution(d, p, v);
  EXPECT_TRUE(rep.passed());
  EXPECT_NEAR(rep.lmi.blocks[1].value, -1.0 + std::sqrt(0.26) + delta, 1e-12);
  EXPECT_NEAR(rep.stability_indicator, 0.5, 1e-12);

  const VerifyReport zero = verify_solution(d, p, Vector(p.nvars, 0.0));
  EXPECT_FALSE(zero.passed());
  ASSERT_NE(zero.lmi.first_violation(), nullptr);
  EXPECT_EQ(zero.lmi.first_violation()->label, "P >= delta I");

  Vector pushed = v;
  pushed[0] = 2.0;
  const VerifyReport far = verify_solution(d, p, pushed);
  EXPECT_FALSE(far.passed());
  EXPECT_EQ(far.lmi.first_violation()->label, "main block <= -delta I");
}

TEST(ExtractGain, ComponentwiseDivision) {
  EXPECT_EQ(extract_gain(Matrix::identity(2), Matrix{{-1, 0}}, TimeDomain::CT, Matrix{{1, 0}}), (Matrix{{1}, {0}}));
  const Matrix l = extract_gain(Matrix{{2, 0}, {0, 4}}, Matrix{{-1, -2}}, TimeDomain::CT, Matrix{{1, 0}});
  EXPECT_NEAR(l(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(l(1, 0), 0.5, 1e-15);
  EXPECT_EQ(extract_gain(Matrix::identity(2), Matrix(1, 2), TimeDomain::DT, Matrix{{1, 0}}), Matrix(2, 1));
}

TEST(ExtractGain, Failures) {
  try {
    extract_gain(Matrix{{1, 2}, {2, 4}}, Matrix{{-1, 0}}, TimeDomain::CT, Matrix{{1, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularX);
  }
  try {
    extract_gain(Matrix::identity(2), Matrix{{1, 0}}, TimeDomain::CT, Matrix{{1, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SignAssertionFailed);
  }
}

TEST(Synthesize, HenonCertificate) {
  const Design d = henon_design();
  const SynthesisResult r = synthesize(d);
  EXPECT_TRUE(sdp::check(r.problem, r.point).passed());
  for (const auto& b : r.margins.blocks) EXPECT_LE(b.value, -1e-8) << b.label;
  EXPECT_LT(r.stability_indicator, 1.0);
  EXPECT_NEAR(r.stability_indicator, spectral_radius(comparison_matrix(d, r.L)), 1e-12);
  EXPECT_TRUE(is_nonneg(r.L));
  EXPECT_TRUE(is_nonneg(r.L * d.c));
  EXPECT_LT(r.gain_identity_residual, 1e-9);
  EXPECT_TRUE(verify_solution(d, r.problem, r.point).passed());
}

TEST(Synthesize, StableScalarAndInfeasibleUncontrollable) {
  const SynthesisResult r = synthesize(scalar(TimeDomain::DT, 0.5, 1.0));
  EXPECT_LT(r.stability_indicator, 1.0);
  try {
    synthesize(scalar(TimeDomain::DT, 0.7, 0.0, 0.6));
    FAIL();
  } catch (const SynthesisFailure& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleAllAlpha);
  }
  try {
    synthesize(scalar(TimeDomain::CT, 0.5, 0.0, 0.1));
    FAIL();
  } catch (const SynthesisFailure& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InfeasibleAllAlpha);
    EXPECT_EQ(e.attempts().size(), SynthOptions::default_alpha_grid().size());
  }
}

TEST(Synthesize, DefaultAlphaGrid) {
  const auto g = SynthOptions::default_alpha_grid();
  ASSERT_EQ(g.size(), 13U);
  EXPECT_NEAR(g.front(), 1e-3, 1e-18);
  EXPECT_NEAR(g.back(), 1e3, 1e-9);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
}

TEST(CertifyGain, ReferenceHenonGain) {
  const Design d = henon_design();
  const GainCertificate c = certify_gain(d, Matrix{{0.0393}, {0.0346}});
  EXPECT_TRUE(c.stable);
  EXPECT_LT(c.stability_indicator, 1.0);
  EXPECT_TRUE(c.lmi_certified());
  for (const auto& m : c.structural) EXPECT_TRUE(m.ok) << m.label;
}

TEST(Comparison, MatchesDefinition) {
  const Design d = henon_design();
  const Matrix l{{0.1}, {0.2}};
  const Matrix want = abs_mat(d.a) + l * d.c + d.fphi + l * d.fpsi;
  EXPECT_EQ(comparison_matrix(d, l), want);
}
