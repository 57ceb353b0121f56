#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "mmobs/error.hpp"
#include "mmobs/numerics.hpp"
#include "support/oracles.hpp"

using namespace mmobs;
using mmobs::testing::Rng;

namespace {

void expect_matrix_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) EXPECT_NEAR(a(i, j), b(i, j), tol) << "entry " << i << "," << j;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

}  // namespace

TEST(SignParts, SplitsMixedMatrix) {
  const Matrix m{{1, -2}, {3, -4}};
  EXPECT_EQ(pos_part(m), (Matrix{{1, 0}, {3, 0}}));
  EXPECT_EQ(neg_part(m), (Matrix{{0, 2}, {0, 4}}));
  EXPECT_EQ(abs_mat(m), (Matrix{{1, 2}, {3, 4}}));
  EXPECT_EQ(pos_part(m) - neg_part(m), m);
}

TEST(SignParts, ZeroAndNonnegative) {
  const Matrix z(2, 3);
  EXPECT_EQ(pos_part(z), z);
  EXPECT_EQ(neg_part(z), z);
  EXPECT_EQ(abs_mat(z), z);
  const Matrix p{{0.5, 2}, {0, 1}};
  EXPECT_EQ(pos_part(p), p);
  EXPECT_EQ(neg_part(p), Matrix(2, 2));
}

TEST(Metzler, DiagonalAndOffDiagonalParts) {
  const Matrix m{{1, -2}, {3, -4}};
  EXPECT_EQ(diag_part(m), (Matrix{{1, 0}, {0, -4}}));
  EXPECT_EQ(offdiag_part(m), (Matrix{{0, -2}, {3, 0}}));
  EXPECT_EQ(metzlerized(m), (Matrix{{1, 2}, {3, -4}}));
  const Matrix d{{-3, 0}, {0, 2}};
  EXPECT_EQ(metzlerized(d), d);
  const Matrix already{{-1, 0.5}, {2, -3}};
  EXPECT_EQ(metzlerized(already), already);
}

TEST(Metzler, Predicate) {
  EXPECT_TRUE(is_metzler(Matrix{{-5, 0.1}, {0, -2}}));
  EXPECT_TRUE(is_metzler(Matrix{{1, -1e-13}, {0, 1}}, 1e-12));
  EXPECT_FALSE(is_metzler(Matrix{{1, -0.5}, {0, 1}}, 0.0));
  EXPECT_THROW(metzlerized(Matrix(2, 3)), Error);
}

TEST(IntervalMatvec, SmallExamples) {
  auto [lo, hi] = interval_matvec_bounds(Matrix{{1, -2}}, Vector{0, 0}, Vector{1, 1});
  EXPECT_DOUBLE_EQ(lo[0], -2.0);
  EXPECT_DOUBLE_EQ(hi[0], 1.0);

  const Vector xl{-1, 2, 0.5}, xh{3, 4, 0.75};
  auto id = interval_matvec_bounds(Matrix::identity(3), xl, xh);
  EXPECT_EQ(id.first, xl);
  EXPECT_EQ(id.second, xh);

  const Matrix a{{1, 2, 0}, {0.5, 0, 3}};
  auto nn = interval_matvec_bounds(a, xl, xh);
  EXPECT_EQ(nn.first, a * xl);
  EXPECT_EQ(nn.second, a * xh);
}

TEST(IntervalMatvec, MatchesVertexEnumeration) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const Matrix a = mmobs::testing::random_matrix(rng, 1 + trial % 3, n, 3.0);
    const Box b = mmobs::testing::random_box(rng, n);
    const auto got = interval_matvec_bounds(a, b.lo, b.hi);
    const auto ref = mmobs::testing::matvec_vertex_bounds(a, b.lo, b.hi);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      EXPECT_NEAR(got.first[i], ref.first[i], 1e-12);
      EXPECT_NEAR(got.second[i], ref.second[i], 1e-12);
    }
  }
}

TEST(LuSolve, ResidualIsSmall) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 10;
    Matrix a = mmobs::testing::random_matrix(rng, n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 0.5;
    const Matrix b = mmobs::testing::random_matrix(rng, n, 2);
    const Matrix x = lu_solve(a, b);
    const Matrix r = a * x - b;
    EXPECT_LE(r.max_abs(), 1e-9 * std::max(1.0, a.max_abs() * x.max_abs()));
  }
}

TEST(LuSolve, SingularAndMismatchedInputs) {
  try {
    lu_solve(Matrix{{1, 2}, {2, 4}}, Vector{1, 1});
    FAIL() << "expected SingularMatrix";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularMatrix);
  }
  EXPECT_THROW(lu_solve(Matrix(2, 3), Vector{1, 1}), Error);
  EXPECT_THROW(lu_solve(Matrix::identity(2), Vector{1, 1, 1}), Error);
}

TEST(LuSolve, InverseOfKnownMatrix) {
  const Matrix inv = inverse(Matrix{{4, 7}, {2, 6}});
  expect_matrix_near(inv, Matrix{{0.6, -0.7}, {-0.2, 0.4}}, 1e-14);
}

TEST(SymEig, HandExamples) {
  auto e = sym_eig(Matrix{{3, 0}, {0, 1}});
  EXPECT_NEAR(e.values[0], 1.0, 1e-14);
  EXPECT_NEAR(e.values[1], 3.0, 1e-14);
  e = sym_eig(Matrix{{2, 1}, {1, 2}});
  EXPECT_NEAR(e.values[0], 1.0, 1e-14);
  EXPECT_NEAR(e.values[1], 3.0, 1e-14);
}

TEST(SymEig, ReconstructionAndEigenAgreement) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 12;
    const Matrix s = mmobs::testing::random_symmetric(rng, n, 5.0);
    const SymEig e = sym_eig(s);
    const Matrix rec = e.vectors * Matrix::diagonal(e.values) * e.vectors.transpose();
    EXPECT_LE((rec - s).max_abs(), 1e-9 * std::max(1.0, s.max_abs()));
    const Matrix orth = e.vectors.transpose() * e.vectors - Matrix::identity(n);
    EXPECT_LE(orth.max_abs(), 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(s));
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(e.values[k], ref.eigenvalues()(k), 1e-9);
  }
}

TEST(SymEig, RejectsAsymmetricInput) {
  try {
    sym_eig(Matrix{{1, 2}, {0, 1}});
    FAIL() << "expected NonSymmetric";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonSymmetric);
  }
}

TEST(Spectrum, RadiusAndAbscissa) {
  EXPECT_NEAR(spectral_radius(Matrix{{0, 1}, {0.3, 0}}), std::sqrt(0.3), 1e-12);
  EXPECT_NEAR(spectral_abscissa(Matrix{{-1, 5}, {0, -2}}), -1.0, 1e-12);
  EXPECT_NEAR(spectral_radius(Matrix{{0, -1}, {1, 0}}), 1.0, 1e-12);
}

TEST(Definiteness, CholeskyAgreesWithEigenvalues) {
  EXPECT_TRUE(cholesky(Matrix{{4, 2}, {2, 3}}).has_value());
  EXPECT_FALSE(cholesky(Matrix{{1, 2}, {2, 1}}).has_value());
  EXPECT_TRUE(is_pos_def(Matrix{{2, 0}, {0, 1}}, 0.5));
  EXPECT_FALSE(is_pos_def(Matrix{{2, 0}, {0, 1}}, 1.5));
}

TEST(IntervalArithmetic, TrigRangesLocateCriticalPoints) {
  const Interval s = sin(Interval{0.0, M_PI});
  EXPECT_NEAR(s.lo, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.hi, 1.0);
  const Interval c = cos(Interval{-M_PI / 2, M_PI / 2});
  EXPECT_NEAR(c.lo, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(c.hi, 1.0);
  const Interval p = pow_int(Interval{-2, 1}, 2);
  EXPECT_DOUBLE_EQ(p.lo, 0.0);
  EXPECT_DOUBLE_EQ(p.hi, 4.0);
  EXPECT_THROW(Interval(1, 2) / Interval(-1, 1), Error);
}
