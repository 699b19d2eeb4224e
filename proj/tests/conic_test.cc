#include "reluiqc/conic.h"

#include <random>

#include <gtest/gtest.h>

#include "test_util.h"

namespace reluiqc::conic {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST(ConicTest, TwoByTwoBound) {
  // max y  s.t.  [[1, y], [y, 1]] >= 0  has y* = 1.
  Program prog;
  prog.num_vars = 1;
  prog.objective = VectorXd::Ones(1);
  MatrixXd e(2, 2);
  e << 0, 1, 1, 0;
  prog.lmis.push_back({MatrixXd::Identity(2, 2), {{0, e}}});
  const Solution sol = Solve(prog);
  ASSERT_EQ(sol.status, Status::kOptimal) << sol.detail;
  EXPECT_NEAR(sol.y(0), 1.0, 1e-6);
  EXPECT_NEAR(sol.upper_bound, 1.0, 1e-6);
}

TEST(ConicTest, LinearRows) {
  Program prog;
  prog.num_vars = 2;
  prog.objective = VectorXd::Ones(2);
  prog.linear.push_back({1.0, {{0, -1.0}}});
  prog.linear.push_back({2.0, {{1, -1.0}}});
  const Solution sol = Solve(prog);
  ASSERT_EQ(sol.status, Status::kOptimal);
  EXPECT_NEAR(sol.objective, 3.0, 1e-6);
}

TEST(ConicTest, NegativeOptimumCertifiesInfeasibility) {
  // max t  s.t.  -I - t I >= 0, t <= 1  has t* = -1.
  Program prog;
  prog.num_vars = 1;
  prog.objective = VectorXd::Ones(1);
  prog.lmis.push_back({-MatrixXd::Identity(3, 3), {{0, -MatrixXd::Identity(3, 3)}}});
  prog.linear.push_back({1.0, {{0, -1.0}}});
  const Solution sol = Solve(prog);
  ASSERT_EQ(sol.status, Status::kOptimal);
  EXPECT_NEAR(sol.upper_bound, -1.0, 1e-6);
}

TEST(ConicTest, RejectsMalformedPrograms) {
  Program prog;
  prog.num_vars = 2;
  prog.objective = VectorXd::Ones(1);
  EXPECT_THROW(Solve(prog), std::invalid_argument);
  prog.objective = VectorXd::Ones(2);
  prog.lmis.push_back({MatrixXd::Identity(2, 2), {{5, MatrixXd::Identity(2, 2)}}});
  EXPECT_THROW(Solve(prog), std::invalid_argument);
}

// Oracle: max y s.t. I + y F >= 0, y <= 10 is min(10, -1 / lambda_min(F)).
TEST(ConicTest, GeneralizedEigenvalueOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 5;
    const MatrixXd f = testing::RandomSymmetric(d, &rng);
    const double lmin = testing::MinEig(f);
    const double expected = lmin < 0 ? std::min(10.0, -1.0 / lmin) : 10.0;
    Program prog;
    prog.num_vars = 1;
    prog.objective = VectorXd::Ones(1);
    prog.lmis.push_back({MatrixXd::Identity(d, d), {{0, f}}});
    prog.linear.push_back({10.0, {{0, -1.0}}});
    const Solution sol = Solve(prog);
    ASSERT_EQ(sol.status, Status::kOptimal) << trial;
    EXPECT_NEAR(sol.y(0), expected, 1e-5 * (1 + expected)) << trial;
  }
}

// Random strictly feasible boxes: the solution stays feasible and beats the
// known interior point y = 0.
TEST(ConicTest, RandomProgramsStayFeasible) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 1 + trial % 4, d = 3;
    Program prog;
    prog.num_vars = p;
    prog.objective = testing::RandomMatrix(p, 1, &rng);
    LmiConstraint lmi{MatrixXd::Identity(d, d), {}};
    for (int i = 0; i < p; ++i) {
      lmi.terms.emplace_back(i, testing::RandomSymmetric(d, &rng));
      prog.linear.push_back({1.0, {{i, 1.0}}});
      prog.linear.push_back({1.0, {{i, -1.0}}});
    }
    prog.lmis.push_back(lmi);
    const Solution sol = Solve(prog);
    ASSERT_EQ(sol.status, Status::kOptimal) << trial;
    EXPECT_GE(MinConstraintValue(prog, sol.y), -1e-6);
    EXPECT_GE(sol.objective, -1e-9);
    EXPECT_LE(sol.objective, sol.upper_bound + 1e-6);
  }
}

}  // namespace
}  // namespace reluiqc::conic
