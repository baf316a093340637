#include <gtest/gtest.h>

#include <sstream>

#include "ddetc/errors.hpp"
#include "ddetc/plant_models.hpp"
#include "test_util.hpp"

using namespace ddetc;
using ddetc::test::mat;
using ddetc::test::max_abs;
using ddetc::test::vec;

namespace {

LtvPlant reference_switching(double ell = 1.0, int p = 12) {
  return LtvPlant::switching(reference_a0(), reference_b0(),
                             flipped_input_matrix(reference_b0(), ell), p);
}

}  // namespace

TEST(Switching, FirstAndSecondBranch) {
  const auto plant = reference_switching();
  EXPECT_EQ(plant.eval(5).B, mat(2, 2, {0.5, 1, 0.1, 0.2}));
  EXPECT_EQ(plant.eval(13).B, mat(2, 2, {0.5, -1, 0.1, -0.2}));
  EXPECT_EQ(plant.eval(13).A, reference_a0());
}

TEST(Switching, BranchBoundaries) {
  const auto plant = reference_switching(2.5);
  EXPECT_EQ(plant.eval(0).B, reference_b0());
  EXPECT_EQ(plant.eval(12).B, reference_b0());
  EXPECT_EQ(plant.eval(24).B, mat(2, 2, {0.5, -2.5, 0.1, -0.5}));
  EXPECT_EQ(plant.eval(25).B, reference_b0());
}

TEST(Switching, PeriodicFromStepOne) {
  const auto plant = reference_switching(1.0, 5);
  for (long k = 1; k < 60; ++k) {
    EXPECT_EQ(plant.eval(k).B, plant.eval(k + 10).B) << k;
  }
}

TEST(Sinusoidal, CosineZeroLeavesA0) {
  const auto plant =
      LtvPlant::sinusoidal(reference_a0(), reference_b0(), 12, 0.8);
  EXPECT_LE(max_abs(plant.eval(3).A - reference_a0()), 1e-15);
}

TEST(Sinusoidal, InitialStep) {
  const auto plant =
      LtvPlant::sinusoidal(reference_a0(), reference_b0(), 7, 0.8);
  EXPECT_LE(max_abs(plant.eval(0).A - mat(2, 2, {1.98, 0.02, 0.18, 0.04})),
            1e-15);
  EXPECT_EQ(plant.eval(0).B, reference_b0());
}

TEST(Vanishing, AmplitudeDecaysToZero) {
  const auto plant =
      LtvPlant::vanishing(reference_a0(), reference_b0(), 10, 30);
  // delta(15) = 0.5 and cos(3 pi) = -1, so A = A0 diag(0.5, 1.5).
  EXPECT_LE(max_abs(plant.eval(15).A - reference_a0() * vec({0.5, 1.5}).asDiagonal()),
            1e-14);
  for (long k = 30; k < 60; ++k) EXPECT_EQ(plant.eval(k).A, reference_a0());
}

TEST(Step, LinearityAndHandValues) {
  const auto plant = reference_switching();
  EXPECT_EQ(plant.step(3, Vec::Zero(2), Vec::Zero(2)), Vec::Zero(2));
  EXPECT_LE(max_abs(plant.step(3, vec({1, 0}), Vec::Zero(2)) - vec({1.1, 0.1})),
            1e-15);
  const auto scalar = LtvPlant::constant(mat(1, 1, {0.5}), mat(1, 1, {1}));
  EXPECT_EQ(scalar.step(0, vec({1}), vec({0})), vec({0.5}));
  EXPECT_THROW(plant.step(0, vec({1}), vec({0, 0})), InvalidInput);
  EXPECT_THROW(plant.eval(-1), InvalidInput);
}

TEST(Stacked, BlocksFollowTheWindow) {
  const auto plant = reference_switching(1.0, 2);
  const auto s = plant.stacked(5, 3);
  ASSERT_EQ(s.calA.cols(), 6);
  ASSERT_EQ(s.calB.cols(), 6);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(s.calB.block(0, 2 * i, 2, 2), plant.eval(2 + i).B);
    EXPECT_EQ(s.calA.block(0, 2 * i, 2, 2), plant.eval(2 + i).A);
  }
  EXPECT_THROW(plant.stacked(2, 3), InvalidInput);
}

TEST(Piecewise, HoldAndLinear) {
  std::vector<Knot> knots = {{10, mat(1, 1, {3}), mat(1, 1, {1})},
                             {0, mat(1, 1, {1}), mat(1, 1, {0})}};
  const auto hold = LtvPlant::piecewise(knots, Interpolation::Hold);
  const auto lin = LtvPlant::piecewise(knots, Interpolation::Linear);
  EXPECT_EQ(hold.eval(5).A(0, 0), 1.0);
  EXPECT_EQ(hold.eval(10).A(0, 0), 3.0);
  EXPECT_NEAR(lin.eval(5).A(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(lin.eval(5).B(0, 0), 0.5, 1e-15);
  EXPECT_EQ(lin.eval(100).A(0, 0), 3.0);
}

TEST(Piecewise, ParsesTextFormat) {
  std::istringstream in("1 1 2 linear\n0 1 0\n4 2 1\n");
  const auto p = LtvPlant::parse_piecewise(in);
  EXPECT_EQ(p.kind(), PlantKind::PiecewiseFile);
  EXPECT_NEAR(p.eval(1).A(0, 0), 1.25, 1e-15);
  std::istringstream bad("1 1 2 cubic\n0 1 0\n4 2 1\n");
  EXPECT_THROW(LtvPlant::parse_piecewise(bad), InvalidInput);
  std::istringstream truncated("1 1 2 hold\n0 1 0\n4 2\n");
  EXPECT_THROW(LtvPlant::parse_piecewise(truncated), InvalidInput);
  std::istringstream dup("1 1 2 hold\n0 1 0\n0 2 1\n");
  EXPECT_THROW(LtvPlant::parse_piecewise(dup), InvalidInput);
}

TEST(Factories, RejectBadShapes) {
  EXPECT_THROW(LtvPlant::constant(Mat(2, 3), Mat(2, 1)), InvalidInput);
  EXPECT_THROW(LtvPlant::constant(Mat::Identity(2, 2), Mat(3, 1)), InvalidInput);
  EXPECT_THROW(LtvPlant::switching(reference_a0(), reference_b0(),
                                   reference_b0(), 0),
               InvalidInput);
}
