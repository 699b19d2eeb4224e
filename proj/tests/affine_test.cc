#include "reluiqc/affine.h"

#include <random>

#include <gtest/gtest.h>

#include "test_util.h"

namespace reluiqc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST(AffineTest, EvaluateAndCongruence) {
  std::mt19937_64 rng(3);
  AffineMatrix e(MatrixXd::Identity(3, 3));
  const MatrixXd c0 = testing::RandomSymmetric(3, &rng), c1 = testing::RandomSymmetric(3, &rng);
  e.AddTerm(0, c0);
  e.AddTerm(1, c1);
  VectorXd x(2);
  x << 0.5, -2.0;
  const MatrixXd direct = MatrixXd::Identity(3, 3) + 0.5 * c0 - 2.0 * c1;
  EXPECT_LT((e.Evaluate(x) - direct).cwiseAbs().maxCoeff(), 1e-14);
  const MatrixXd t = testing::RandomMatrix(3, 2, &rng);
  EXPECT_LT((e.Congruence(t).Evaluate(x) - t.transpose() * direct * t).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((e.Transpose().Evaluate(x) - direct.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  VectorXd shifted = VectorXd::Zero(5);
  shifted.tail(2) = x;
  EXPECT_LT((e.Shifted(3).Evaluate(shifted) - direct).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(AffineTest, BlocksAndArithmetic) {
  AffineMatrix a(MatrixXd::Ones(1, 1)), b(1, 2), c(2, 1), d(MatrixXd::Identity(2, 2));
  b.AddTerm(0, MatrixXd::Ones(1, 2));
  c = b.Transpose();
  const AffineMatrix blk = AffineMatrix::Blocks(a, b, c, d);
  VectorXd x = VectorXd::Constant(1, 3.0);
  MatrixXd expected(3, 3);
  expected << 1, 3, 3, 3, 1, 0, 3, 0, 1;
  EXPECT_EQ(blk.Evaluate(x), expected);
  EXPECT_EQ((2.0 * blk - blk).Evaluate(x), expected);
  EXPECT_THROW(AffineMatrix::Blocks(a, c, b, d), std::invalid_argument);
}

TEST(AffineTest, BlockRoundTrip) {
  std::mt19937_64 rng(5);
  VariableSet vars;
  vars.Add("S", BlockKind::kSymmetric, 3, ConeTag::kPsd);
  vars.Add("M", BlockKind::kSquare, 2, ConeTag::kFree);
  vars.Add("D", BlockKind::kDiagonal, 4, ConeTag::kDiagPositive);
  EXPECT_EQ(vars.num_scalars(), 6 + 4 + 4);
  VectorXd x = VectorXd::Zero(vars.num_scalars());
  const MatrixXd s = testing::RandomSymmetric(3, &rng);
  const MatrixXd m = testing::RandomMatrix(2, 2, &rng);
  const MatrixXd dg = testing::RandomMatrix(4, 1, &rng).asDiagonal();
  vars.Find("S").Assign(s, &x);
  vars.Find("M").Assign(m, &x);
  vars.Find("D").Assign(dg, &x);
  EXPECT_EQ(vars.Find("S").Value(x), s);
  EXPECT_EQ(vars.Find("M").Value(x), m);
  EXPECT_EQ(vars.Find("D").Value(x), dg);
  EXPECT_EQ(vars.Find("S").Expression().Evaluate(x), s);
  EXPECT_EQ(vars.Find("M").Expression().Evaluate(x), m);

  VariableSet outer;
  outer.Add("P", BlockKind::kSymmetric, 1, ConeTag::kPsd);
  const int offset = outer.Append(vars, "pi.");
  EXPECT_EQ(offset, 1);
  EXPECT_TRUE(outer.Contains("pi.M"));
  EXPECT_EQ(outer.Find("pi.M").offset, vars.Find("M").offset + 1);
  EXPECT_THROW(outer.Find("nope"), std::out_of_range);
}

}  // namespace
}  // namespace reluiqc
