#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <sstream>

#include "ddetc/controller_synthesis.hpp"
#include "ddetc/errors.hpp"
#include "ddetc/lyapunov_monitor.hpp"
#include "ddetc/proximity_sets.hpp"
#include "ddetc/rng.hpp"
#include "test_util.hpp"

using namespace ddetc;
using ddetc::test::mat;
using ddetc::test::max_abs;

namespace {

DataWindow explore(const LtvPlant& plant, std::uint64_t seed, int T) {
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

double spectral_radius(const Mat& m) {
  return Eigen::EigenSolver<Mat>(m).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Synthesis, ZeroWindowIsEmpty) {
  const auto rep = synthesize_detailed(DataWindow(2, 2, 4));
  EXPECT_FALSE(rep.bundle);
  EXPECT_FALSE(rep.diagnostic.empty());
}

TEST(Synthesis, ReferencePlantGainIsStabilizing) {
  const auto plant = LtvPlant::constant(reference_a0(), reference_b0());
  for (std::uint64_t seed : {1u, 2u, 42u}) {
    const auto b = synthesize(explore(plant, seed, 4));
    ASSERT_TRUE(b) << "seed " << seed;
    EXPECT_LT(spectral_radius(reference_a0() + reference_b0() * b->K), 1.0);
    EXPECT_GT(b->a1, 0.0);
    EXPECT_LT(b->a1, 1.0);
    EXPECT_LE(theta_exact(reference_a0(), reference_b0(), b->K, b->S),
              b->a1 * (1.0 + 1e-9));
  }
}

TEST(Synthesis, ExtractionIdentities) {
  const auto plant = LtvPlant::sinusoidal(reference_a0(), reference_b0(), 10, 0.8);
  const auto w = explore(plant, 5, 4);
  const auto b = synthesize(w);
  ASSERT_TRUE(b);
  const Mat xy = w.xhat() * b->Y;
  const double s = 1.0 + xy.norm();
  EXPECT_LE(max_abs(xy - xy.transpose()), 1e-9 * s);
  EXPECT_LE(max_abs(b->S.mat() * xy - Mat::Identity(2, 2)), 1e-8);
  EXPECT_LE(max_abs(b->K * xy - w.u() * b->Y), 1e-8 * (1.0 + b->K.norm()) * s);
  const Mat resid = b->H.mat() - (1.0 + 1.0 / b->varsigma) * b->F.mat() -
                    b->eps_F * b->H.mat();
  EXPECT_LE(spectral_norm(resid), 1e-12 * spectral_norm(b->H.mat()));
  EXPECT_NEAR(b->a1, 1.0 - b->a, 1e-15);
  EXPECT_NEAR(b->a2, 1.0 + 1.0 / b->varsigma, 1e-9 * b->a2);
}

TEST(Synthesis, ScalarPlantDecay) {
  const auto plant = LtvPlant::constant(mat(1, 1, {0.5}), mat(1, 1, {1}));
  const auto w = explore(plant, 3, 2);
  const auto b = synthesize(w);
  ASSERT_TRUE(b);
  const double cl = 0.5 + b->K(0, 0);
  // Scalar oracle: (a + bK)^2 S <= a1 S.
  EXPECT_LE(cl * cl, b->a1 * (1.0 + 1e-9));
  const auto rep = verify_property(*b, w, 500, 1);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_EQ(rep.membership_failures, 0);
}

TEST(Synthesis, NormalizedAndRawSolvesAgreeOnStability) {
  const auto plant = LtvPlant::constant(reference_a0(), reference_b0());
  const auto w = explore(plant, 42, 4);
  SynthesisOptions opts;
  opts.normalize_data = true;
  const auto n = synthesize(w, opts);
  const auto r = synthesize(w);
  ASSERT_TRUE(n && r);
  EXPECT_LT(spectral_radius(reference_a0() + reference_b0() * n->K), 1.0);
  EXPECT_LT(spectral_radius(reference_a0() + reference_b0() * r->K), 1.0);
}

TEST(DecayRate, Arithmetic) {
  ControllerBundle b;
  b.a1 = 0.9;
  b.a2 = 2.0;
  EXPECT_DOUBLE_EQ(decay_rate_bound(b, 0.0), 0.9);
  EXPECT_NEAR(decay_rate_bound(b, 0.05), 1.0, 1e-15);
  EXPECT_GT(decay_rate_bound(b, 1.0), 1.0);
}

TEST(Property, HoldsOnExplorationBundles) {
  const auto plant = LtvPlant::switching(reference_a0(), reference_b0(),
                                         flipped_input_matrix(reference_b0(), 1), 12);
  const auto w = explore(plant, 42, 4);
  const auto b = synthesize(w);
  ASSERT_TRUE(b);
  const auto rep = verify_property(*b, w, 500, 7);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_EQ(rep.membership_failures, 0);
  EXPECT_GE(rep.worst_slack, 0.0);
  EXPECT_EQ(rep.samples, 1500);
}

TEST(Property, CorruptedGainIsCaught) {
  const auto plant = LtvPlant::constant(reference_a0(), reference_b0());
  const auto w = explore(plant, 42, 4);
  auto b = synthesize(w);
  ASSERT_TRUE(b);
  b->K(0, 0) += 0.5;
  const auto rep = verify_property(*b, w, 200, 3);
  EXPECT_GT(rep.violations, 0);
  EXPECT_LT(rep.worst_slack, 0.0);
}

TEST(Bundle, TextRoundTrip) {
  const auto plant = LtvPlant::constant(reference_a0(), reference_b0());
  const auto b = synthesize(explore(plant, 1, 4));
  ASSERT_TRUE(b);
  std::stringstream io;
  write_bundle(io, *b);
  const auto r = read_bundle(io);
  EXPECT_EQ(r.K, b->K);
  EXPECT_EQ(r.S.mat(), b->S.mat());
  EXPECT_EQ(r.F.mat(), b->F.mat());
  EXPECT_EQ(r.a1, b->a1);
  EXPECT_EQ(r.a2, b->a2);
  EXPECT_EQ(r.varsigma, b->varsigma);
}

TEST(Synthesis, OverflowingDataIsReportedNotThrown) {
  const Mat big = Mat::Constant(2, 4, 1e200);
  const DataWindow w(big, big, Mat::Constant(2, 4, 1e200), 4);
  SynthesisReport rep;
  EXPECT_NO_THROW(rep = synthesize_detailed(w));
  EXPECT_FALSE(rep.bundle);
  EXPECT_FALSE(rep.diagnostic.empty());
}

TEST(Synthesis, RejectsBadEpsF) {
  SynthesisOptions opts;
  opts.eps_F = 1.0;
  EXPECT_THROW(synthesize_detailed(DataWindow(2, 2, 4), opts), InvalidInput);
}
