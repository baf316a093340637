#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <limits>

#include "ddetc/errors.hpp"
#include "ddetc/matrix_core.hpp"
#include "ddetc/rng.hpp"
#include "test_util.hpp"

using namespace ddetc;
using ddetc::test::mat;
using ddetc::test::max_abs;
using ddetc::test::vec;

namespace {

SymMat random_sym(Rng& rng, int n) { return SymMat(rng.normal_mat(n, n)); }

SymMat random_spd(Rng& rng, int n) {
  const Mat g = rng.normal_mat(n, n);
  return SymMat(g * g.transpose() + 0.1 * Mat::Identity(n, n));
}

// Largest t with lambda_max(A - t B) >= 0, by bisection on Eigen's solver.
double bisect_gen_eig_max(const Mat& a, const Mat& b) {
  auto positive = [&](double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a - t * b);
    return es.eigenvalues().maxCoeff() > 0.0;
  };
  double lo = -1e3, hi = 1e3;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (positive(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(SymEig, IdentityHasUnitSpectrum) {
  const auto e = sym_eig(SymMat::Identity(3));
  EXPECT_NEAR(max_abs(e.values - Vec::Ones(3)), 0.0, 1e-15);
}

TEST(SymEig, TwoByTwoHandValues) {
  const auto e = sym_eig(SymMat(mat(2, 2, {2, 1, 1, 2})));
  EXPECT_NEAR(e.values(0), 1.0, 1e-14);
  EXPECT_NEAR(e.values(1), 3.0, 1e-14);
}

TEST(SymEig, DiagonalIsSortedAscending) {
  const auto e = sym_eig(SymMat::Diagonal(vec({4, -1, 0})));
  EXPECT_DOUBLE_EQ(e.values(0), -1.0);
  EXPECT_DOUBLE_EQ(e.values(1), 0.0);
  EXPECT_DOUBLE_EQ(e.values(2), 4.0);
}

TEST(SymEig, MatchesEigenOnRandomMatrices) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 7;
    const SymMat s = random_sym(rng, n);
    const auto e = sym_eig(s);
    Eigen::SelfAdjointEigenSolver<Mat> ref(s.mat());
    const double scale = 1.0 + s.mat().norm();
    EXPECT_LE(max_abs(e.values - ref.eigenvalues()), 1e-12 * scale);
    // Orthonormal vectors reconstructing the matrix.
    EXPECT_LE(max_abs(e.vectors.transpose() * e.vectors - Mat::Identity(n, n)),
              1e-12);
    const Mat rebuilt =
        e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_LE(max_abs(rebuilt - s.mat()), 1e-12 * scale);
    for (int i = 1; i < n; ++i) EXPECT_LE(e.values(i - 1), e.values(i));
  }
}

TEST(SymEig, RejectsNonFinite) {
  Mat m = Mat::Identity(2, 2);
  m(0, 1) = m(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sym_eig(SymMat(m)), InvalidInput);
}

TEST(SymMat, RejectsNonSquare) { EXPECT_THROW(SymMat(Mat(2, 3)), InvalidInput); }

TEST(Pinv, DiagonalWithZero) {
  const Mat p = pinv(mat(2, 2, {2, 0, 0, 0}));
  EXPECT_NEAR(max_abs(p - mat(2, 2, {0.5, 0, 0, 0})), 0.0, 1e-15);
}

TEST(Pinv, Identity) {
  EXPECT_NEAR(max_abs(pinv(Mat::Identity(2, 2)) - Mat::Identity(2, 2)), 0.0,
              1e-15);
}

TEST(Pinv, RankOneGramHandValue) {
  const Mat z = mat(2, 2, {1, 0.5, 0, 0});
  const Mat p = pinv(z * z.transpose());
  EXPECT_NEAR(max_abs(p - mat(2, 2, {0.8, 0, 0, 0})), 0.0, 1e-14);
}

TEST(Pinv, PenroseConditionsOnRankDeficientMatrices) {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int r = 2 + trial % 4, c = 1 + trial % 5, k = 1 + trial % 2;
    const Mat m = rng.normal_mat(r, k) * rng.normal_mat(k, c);
    const Mat p = pinv(m);
    const double s = 1.0 + m.norm() * p.norm();
    EXPECT_LE(max_abs(m * p * m - m), 1e-10 * s);
    EXPECT_LE(max_abs(p * m * p - p), 1e-10 * s * p.norm());
    EXPECT_LE(max_abs((m * p).transpose() - m * p), 1e-10 * s);
    EXPECT_LE(max_abs((p * m).transpose() - p * m), 1e-10 * s);
    const Mat ref = m.completeOrthogonalDecomposition().pseudoInverse();
    EXPECT_LE(max_abs(p - ref), 1e-8 * (1.0 + ref.norm()));
  }
}

TEST(Pinv, RejectsNegativeTolerance) {
  EXPECT_THROW(pinv(Mat::Identity(2, 2), -1.0), InvalidInput);
}

TEST(GenEig, DiagonalPair) {
  const SymMat a = SymMat::Diagonal(vec({2, 2}));
  const SymMat b = SymMat::Diagonal(vec({1, 4}));
  EXPECT_NEAR(gen_eig_max(a, b), 2.0, 1e-14);
  EXPECT_NEAR(gen_eig_min(a, b), 0.5, 1e-14);
}

TEST(GenEig, EqualPairGivesOne) {
  Rng rng(3);
  const SymMat s = random_spd(rng, 3);
  EXPECT_NEAR(gen_eig_max(s, s), 1.0, 1e-12);
  EXPECT_NEAR(gen_eig_min(s, s), 1.0, 1e-12);
}

TEST(GenEig, MatchesBisectionOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMat a = random_sym(rng, 3);
    const SymMat b = random_spd(rng, 3);
    EXPECT_NEAR(gen_eig_max(a, b), bisect_gen_eig_max(a.mat(), b.mat()), 1e-10);
    EXPECT_NEAR(gen_eig_min(a, b), -bisect_gen_eig_max(-a.mat(), b.mat()),
                1e-10);
  }
}

TEST(GenEig, MaxVectorAttainsTheRatio) {
  Rng rng(9);
  const SymMat a = random_sym(rng, 4);
  const SymMat b = random_spd(rng, 4);
  const Vec v = gen_eig_max_vector(a, b);
  EXPECT_NEAR(v.dot(a.mat() * v) / v.dot(b.mat() * v), gen_eig_max(a, b), 1e-10);
}

TEST(GenEig, RejectsIndefiniteRightHandSide) {
  EXPECT_THROW(gen_eig_max(SymMat::Identity(2), SymMat::Diagonal(vec({1, -1}))),
               NotPositiveDefinite);
  EXPECT_THROW(gen_eig_max(SymMat::Identity(2), SymMat::Identity(3)),
               InvalidInput);
}

TEST(NMap, ScalarColumns) {
  EXPECT_NEAR(max_abs(n_map(mat(1, 2, {3, 4})) - mat(2, 2, {3, 0, 0, 4})), 0.0,
              0.0);
}

TEST(NMap, BlockDiagonalColumns) {
  const Mat expect = mat(4, 2, {1, 0, 2, 0, 0, 3, 0, 4});
  EXPECT_EQ(n_map(mat(2, 2, {1, 3, 2, 4})), expect);
}

TEST(ShiftAppend, DropsOldestColumn) {
  EXPECT_EQ(shift_append(mat(2, 2, {1, 2, 3, 4}), vec({5, 6})),
            mat(2, 2, {2, 5, 4, 6}));
  EXPECT_EQ(shift_append(mat(1, 1, {1}), vec({7})), mat(1, 1, {7}));
  EXPECT_THROW(shift_append(mat(2, 2, {1, 2, 3, 4}), vec({1})), InvalidInput);
}

TEST(Definiteness, ToleranceAndSqrt) {
  EXPECT_TRUE(is_psd(SymMat::Diagonal(vec({1, 0}))));
  EXPECT_FALSE(is_pd(SymMat::Diagonal(vec({1, 0}))));
  EXPECT_FALSE(is_psd(SymMat::Diagonal(vec({1, -1e-3}))));
  Rng rng(13);
  const SymMat s = random_spd(rng, 4);
  const SymMat r = sym_sqrt(s);
  EXPECT_LE(max_abs(r.mat() * r.mat() - s.mat()), 1e-11 * s.mat().norm());
  const SymMat ri = sym_inv_sqrt(s);
  EXPECT_LE(max_abs(ri.mat() * s.mat() * ri.mat() - Mat::Identity(4, 4)), 1e-10);
  EXPECT_LE(max_abs(sym_inverse(s).mat() * s.mat() - Mat::Identity(4, 4)), 1e-10);
  EXPECT_THROW(sym_inverse(SymMat::Diagonal(vec({1, 0}))), NotPositiveDefinite);
}

TEST(SpectralNorm, MatchesSingularValues) {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat m = rng.normal_mat(3, 5);
    Eigen::JacobiSVD<Mat> svd(m);
    EXPECT_NEAR(spectral_norm(m), svd.singularValues()(0), 1e-12);
  }
  EXPECT_EQ(spectral_norm(Mat(0, 0)), 0.0);
}

TEST(Congruence, IsSymmetricProduct) {
  const SymMat s = SymMat::Diagonal(vec({1, 2}));
  const Mat b = mat(2, 2, {1, 1, 0, 1});
  EXPECT_EQ(congruence(s, b).mat(), mat(2, 2, {1, 1, 1, 3}));
}
