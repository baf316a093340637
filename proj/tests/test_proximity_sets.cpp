#include <gtest/gtest.h>

#include <cmath>

#include "ddetc/proximity_sets.hpp"
#include "ddetc/rng.hpp"
#include "test_util.hpp"

using namespace ddetc;
using ddetc::test::mat;
using ddetc::test::max_abs;
using ddetc::test::vec;

namespace {

DataWindow hand_window() {
  return DataWindow(mat(1, 2, {1, 0.5}), mat(1, 2, {0.5, 0.25}),
                    mat(1, 2, {0, 0}), 2);
}

SymMat s1(double v) { return SymMat(Mat::Constant(1, 1, v)); }

DataWindow lti_window(const LtvPlant& plant, std::uint64_t seed, int T) {
  Rng rng(seed);
  DataWindow w(plant.nx(), plant.nu(), T);
  Vec x = Vec::Ones(plant.nx());
  for (int k = 0; k < T; ++k) {
    const Vec u = rng.uniform_vec(plant.nu(), -1, 1);
    const Vec xn = plant.step(k, x, u);
    w = w.push(x, xn, u);
    x = xn;
  }
  return w;
}

}  // namespace

TEST(Ellipsoid, HandExample) {
  const auto e = ellipsoid_params(hand_window(), s1(0.01));
  EXPECT_LE(max_abs(e.M.mat() - mat(2, 2, {1.25, 0, 0, 0})), 1e-15);
  EXPECT_NEAR(e.Zc(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(e.Zc(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(e.Delta.mat()(0, 0), 0.01, 1e-12);
  EXPECT_TRUE(is_nonempty(e));
  EXPECT_FALSE(is_bounded(e));
}

TEST(Ellipsoid, ZeroWindowGivesDeltaEqualF) {
  const SymMat f = SymMat::Diagonal(vec({0.2, 0.3}));
  const auto e = ellipsoid_params(DataWindow(2, 2, 4), f);
  EXPECT_LE(max_abs(e.Delta.mat() - f.mat()), 0.0);
}

TEST(Ellipsoid, FullRankDataIsBounded) {
  const auto plant = LtvPlant::constant(reference_a0(), reference_b0());
  const auto e = ellipsoid_params(lti_window(plant, 3, 4), SymMat::Identity(2));
  EXPECT_TRUE(is_bounded(e));
  EXPECT_TRUE(is_nonempty(e));
}

TEST(Ellipsoid, NegativeShapeIsEmpty) {
  EllipsoidParams e;
  e.Delta = SymMat::Identity(2) * -1.0;
  EXPECT_FALSE(is_nonempty(e));
}

TEST(Contains, TruePlantOfLtiData) {
  const auto plant = LtvPlant::constant(reference_a0(), reference_b0());
  const auto w = lti_window(plant, 4, 5);
  for (double f : {1e-6, 1.0}) {
    EXPECT_TRUE(contains(w, SymMat::Identity(2) * f, reference_a0(), reference_b0()));
  }
}

TEST(Contains, CenterIsMember) {
  const auto plant = LtvPlant::sinusoidal(reference_a0(), reference_b0(), 10, 0.8);
  const auto w = lti_window(plant, 5, 4);
  const SymMat f = SymMat::Identity(2) * 0.1;
  const auto e = ellipsoid_params(w, f);
  ASSERT_TRUE(is_nonempty(e));
  const Mat ma = e.Zc.topRows(2).transpose();
  const Mat mb = e.Zc.bottomRows(2).transpose();
  EXPECT_TRUE(contains(w, f, ma, mb));
  EXPECT_TRUE(contains_ellipsoid(e, ma, mb));
}

TEST(Contains, HandExampleRejectsDistantPlant) {
  const auto w = hand_window();
  EXPECT_FALSE(contains(w, s1(0.01), mat(1, 1, {0.7}), mat(1, 1, {0})));
  EXPECT_TRUE(contains(w, s1(0.06), mat(1, 1, {0.7}), mat(1, 1, {0})));
}

TEST(Contains, BothFormsAgreeOnRandomMatrices) {
  const auto plant = LtvPlant::sinusoidal(reference_a0(), reference_b0(), 10, 0.8);
  Rng rng(8);
  int inside = 0;
  for (int t = 0; t < 5; ++t) {
    const auto w = lti_window(plant, 20 + t, 4);
    const SymMat f = SymMat::Identity(2) * 0.05;
    const auto e = ellipsoid_params(w, f);
    for (int i = 0; i < 200; ++i) {
      const double scale = std::pow(10.0, rng.uniform(-3.0, 0.0));
      const Mat zhat = e.Zc + scale * rng.normal_mat(4, 2);
      const Mat ma = zhat.topRows(2).transpose();
      const Mat mb = zhat.bottomRows(2).transpose();
      const Mat d = data_mismatch(w, ma, mb);
      const double gap = lambda_min(f - SymMat(d * d.transpose()));
      if (std::abs(gap) < 1e-9) continue;
      EXPECT_EQ(contains(w, f, ma, mb), contains_ellipsoid(e, ma, mb));
      inside += gap > 0;
    }
  }
  EXPECT_GT(inside, 0);
}

TEST(MinInflation, LtiIsZero) {
  const auto plant = LtvPlant::constant(reference_a0(), reference_b0());
  const auto w = lti_window(plant, 9, 4);
  EXPECT_EQ(min_inflation(w, SymMat::Identity(2) * 0.1, SymMat::Identity(2),
                          reference_a0(), reference_b0()),
            0.0);
}

TEST(MinInflation, HandExample) {
  const double eps = min_inflation(hand_window(), s1(0.01), s1(1.0),
                                   mat(1, 1, {0.7}), mat(1, 1, {0}));
  EXPECT_NEAR(eps, 0.04, 1e-12);
}

TEST(MinInflation, ScalarScalingInS) {
  const double e1 = min_inflation(hand_window(), s1(0.01), s1(1.0),
                                  mat(1, 1, {0.7}), mat(1, 1, {0}));
  const double e2 = min_inflation(hand_window(), s1(0.01), s1(2.0),
                                  mat(1, 1, {0.7}), mat(1, 1, {0}));
  EXPECT_NEAR(e2, 2.0 * e1, 1e-12);
}

TEST(MinInflation, CertificateIsTight) {
  const auto plant = LtvPlant::sinusoidal(reference_a0(), reference_b0(), 10, 0.8);
  const auto w = lti_window(plant, 2, 4);
  const SymMat f = SymMat::Identity(2) * 1e-3;
  const SymMat s = SymMat(mat(2, 2, {2, 0.3, 0.3, 1}));
  const auto m = plant.eval(0);
  const double eps = min_inflation(w, f, s, m.A, m.B);
  ASSERT_GT(eps, 0.0);
  const Mat d = data_mismatch(w, m.A, m.B);
  const SymMat dd(d * d.transpose());
  const SymMat si = sym_inverse(s);
  EXPECT_GE(lambda_min(f + si * eps - dd), -1e-10);
  EXPECT_LT(lambda_min(f + si * (0.99 * eps) - dd), 0.0);
}
