#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "ddetc/errors.hpp"
#include "ddetc/maxdet_solver.hpp"
#include "ddetc/rng.hpp"
#include "test_util.hpp"

using namespace ddetc;
using ddetc::test::mat;
using ddetc::test::vec;

namespace {

SymMat s1(double v) { return SymMat(Mat::Constant(1, 1, v)); }

// diag(x1, 1 - x1).
AffineMatFn unit_interval() {
  return {SymMat::Diagonal(vec({0, 1})), {SymMat::Diagonal(vec({1, -1}))}};
}

}  // namespace

TEST(CheckPoint, ConstantIdentity) {
  SdpProblem p;
  p.num_vars = 1;
  p.constraints.push_back({SymMat::Identity(2), {SymMat::Zero(2)}});
  EXPECT_DOUBLE_EQ(check_point(p, vec({3.0}))[0], 1.0);
}

TEST(CheckPoint, DiagonalMargin) {
  SdpProblem p;
  p.num_vars = 1;
  p.constraints.push_back(unit_interval());
  p.var_bounds.push_back({0, 0.1});
  const auto m = check_point(p, vec({0.25}));
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NEAR(m[0], 0.25, 1e-15);
  EXPECT_NEAR(m[1], 0.15, 1e-15);
}

TEST(CheckPoint, RejectsWrongSizes) {
  SdpProblem p;
  p.num_vars = 2;
  p.constraints.push_back({SymMat::Identity(2), {SymMat::Zero(2)}});
  EXPECT_THROW(check_point(p, vec({1, 2})), InvalidInput);
}

TEST(Feasibility, ObviousInteriorPoint) {
  SdpProblem p;
  p.num_vars = 1;
  p.constraints.push_back(unit_interval());
  const auto sol = solve_feasibility(p);
  EXPECT_EQ(sol.status, SdpStatus::Feasible);
  EXPECT_GT(sol.x(0), 1e-6);
  EXPECT_LT(sol.x(0), 1.0 - 1e-6);
}

TEST(Feasibility, ConstantNegativeDefinite) {
  SdpProblem p;
  p.num_vars = 1;
  p.constraints.push_back({SymMat::Identity(2) * -1.0, {SymMat::Zero(2)}});
  EXPECT_EQ(solve_feasibility(p).status, SdpStatus::Infeasible);
}

TEST(Feasibility, ContradictoryBounds) {
  // x >= 1 and 0.5 - x > 0.
  SdpProblem p;
  p.num_vars = 1;
  p.constraints.push_back({s1(0.5), {s1(-1.0)}});
  p.var_bounds.push_back({0, 1.0});
  EXPECT_EQ(solve_feasibility(p).status, SdpStatus::Infeasible);
}

TEST(Feasibility, ConstantProblemsFollowTheEigenvalueRule) {
  Rng rng(23);
  const SolverOptions opts;
  for (int trial = 0; trial < 40; ++trial) {
    SdpProblem p;
    p.num_vars = 1;
    const int n = 1 + trial % 3;
    const Mat g = rng.normal_mat(n, n);
    const SymMat c = SymMat(g) + SymMat::Identity(n) * rng.uniform(-0.5, 1.5);
    p.constraints.push_back({c, {SymMat::Zero(n)}});
    const bool expect = lambda_min(c) >= opts.strict_margin;
    const auto sol = solve_feasibility(p, opts);
    EXPECT_EQ(sol.status == SdpStatus::Feasible, expect) << "trial " << trial;
    EXPECT_TRUE(sol.status == SdpStatus::Feasible ||
                sol.status == SdpStatus::Infeasible);
  }
}

TEST(Maxdet, SymmetricIntervalOptimum) {
  SdpProblem p;
  p.num_vars = 1;
  p.constraints.push_back(unit_interval());
  p.det_block = 0;
  const auto sol = solve_maxdet(p);
  ASSERT_EQ(sol.status, SdpStatus::Optimal);
  EXPECT_NEAR(sol.x(0), 0.5, 1e-5);
  ASSERT_TRUE(sol.logdet_value);
  EXPECT_NEAR(std::exp(*sol.logdet_value), 0.25, 1e-6);
}

TEST(Maxdet, BoxGivesProductOfUpperBounds) {
  // maximize logdet diag(h1, h2) with h1 <= 2, h2 <= 3.
  SdpProblem p;
  p.num_vars = 2;
  p.constraints.push_back(
      {SymMat::Zero(2), {SymMat::Diagonal(vec({1, 0})), SymMat::Diagonal(vec({0, 1}))}});
  p.constraints.push_back({s1(2.0), {s1(-1.0), s1(0.0)}});
  p.constraints.push_back({s1(3.0), {s1(0.0), s1(-1.0)}});
  p.det_block = 0;
  const auto sol = solve_maxdet(p);
  ASSERT_EQ(sol.status, SdpStatus::Optimal);
  EXPECT_NEAR(std::exp(*sol.logdet_value), 6.0, 1e-4);
  const auto m = check_point(p, sol.x);
  for (double v : m) EXPECT_GE(v, SolverOptions{}.strict_margin * 0.5);
}

TEST(Maxdet, StageValuesIncreaseAlongThePath) {
  SdpProblem p;
  p.num_vars = 1;
  p.constraints.push_back(unit_interval());
  p.constraints.push_back({s1(0.3), {s1(-1.0)}});  // x <= 0.3
  p.det_block = 0;
  const auto sol = solve_maxdet(p);
  ASSERT_EQ(sol.status, SdpStatus::Optimal);
  EXPECT_NEAR(sol.x(0), 0.3, 1e-4);
  for (std::size_t i = 1; i < sol.stage_logdet.size(); ++i) {
    EXPECT_GE(sol.stage_logdet[i], sol.stage_logdet[i - 1] - 1e-12);
  }
}

TEST(Maxdet, RandomTwoVariableInstancesMatchGridSearch) {
  Rng rng(31);
  for (int trial = 0; trial < 4; ++trial) {
    const SymMat c1(rng.normal_mat(2, 2) * 0.7);
    const SymMat c2(rng.normal_mat(2, 2) * 0.7);
    SdpProblem p;
    p.num_vars = 2;
    p.constraints.push_back({SymMat::Identity(2), {c1, c2}});
    p.det_block = 0;
    p.constraints.push_back({s1(1.0), {s1(-1.0), s1(0.0)}});
    p.constraints.push_back({s1(1.0), {s1(0.0), s1(-1.0)}});
    p.var_bounds = {{0, -1.0}, {1, -1.0}};
    const auto sol = solve_maxdet(p);
    ASSERT_EQ(sol.status, SdpStatus::Optimal);
    double best = -std::numeric_limits<double>::infinity();
    constexpr int kN = 1000;
    for (int i = 0; i <= kN; ++i) {
      for (int j = 0; j <= kN; ++j) {
        const double x = -1.0 + 2.0 * i / kN, y = -1.0 + 2.0 * j / kN;
        const Mat d = Mat::Identity(2, 2) + x * c1.mat() + y * c2.mat();
        if (d.determinant() > 0.0 && d.trace() > 0.0) {
          best = std::max(best, std::log(d.determinant()));
        }
      }
    }
    // The solver may beat the grid slightly, never by much in the other way.
    EXPECT_NEAR(*sol.logdet_value, best, 1e-3) << "trial " << trial;
  }
}

TEST(Maxdet, IterationBudgetYieldsMaxIter) {
  SdpProblem p;
  p.num_vars = 1;
  p.constraints.push_back(unit_interval());
  p.det_block = 0;
  SolverOptions opts;
  opts.max_newton_steps = 2;
  EXPECT_EQ(solve_maxdet(p, opts).status, SdpStatus::MaxIter);
}

TEST(Maxdet, WritesNewtonTrace) {
  const auto path =
      std::filesystem::temp_directory_path() / "ddetc_solver_trace.csv";
  SdpProblem p;
  p.num_vars = 1;
  p.constraints.push_back(unit_interval());
  p.det_block = 0;
  SolverOptions opts;
  opts.trace_path = path.string();
  ASSERT_EQ(solve_maxdet(p, opts).status, SdpStatus::Optimal);
  std::ifstream in(path);
  std::string header;
  ASSERT_TRUE(std::getline(in, header));
  EXPECT_FALSE(header.empty());
  int lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_GT(lines, 3);
}

TEST(Maxdet, InfeasibleProblemReported) {
  SdpProblem p;
  p.num_vars = 1;
  p.constraints.push_back({SymMat::Diagonal(vec({-1, -1})), {SymMat::Zero(2)}});
  p.det_block = 0;
  EXPECT_EQ(solve_maxdet(p).status, SdpStatus::Infeasible);
}
