#include "reluiqc/cones.h"

#include <random>

#include <gtest/gtest.h>

#include "test_util.h"

namespace reluiqc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd Horn() {
  MatrixXd h(5, 5);
  // clang-format off
  h <<  1, -1,  1,  1, -1,
       -1,  1, -1,  1,  1,
        1, -1,  1, -1,  1,
        1,  1, -1,  1, -1,
       -1,  1,  1, -1,  1;
  // clang-format on
  return h;
}

// Exact minimum of x'Hx over integer points of the simplex scaled by n,
// enumerated by nested loops.
long HornGridMinimum(int n) {
  const MatrixXd hd = Horn();
  long best = std::numeric_limits<long>::max();
  int c[5];
  for (c[0] = 0; c[0] <= n; ++c[0]) {
    for (c[1] = 0; c[0] + c[1] <= n; ++c[1]) {
      for (c[2] = 0; c[0] + c[1] + c[2] <= n; ++c[2]) {
        for (c[3] = 0; c[0] + c[1] + c[2] + c[3] <= n; ++c[3]) {
          c[4] = n - c[0] - c[1] - c[2] - c[3];
          long v = 0;
          for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) v += static_cast<long>(hd(i, j)) * c[i] * c[j];
          }
          best = std::min(best, v);
        }
      }
    }
  }
  return best;
}

MatrixXd RandomCompletelyPositive(int n, std::mt19937_64* rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int k = 1 + static_cast<int>(unif(*rng) * 5);
  MatrixXd b(n, k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) b(i, j) = unif(*rng) < 0.3 ? 0.0 : unif(*rng);
  }
  return b * b.transpose();
}

TEST(SymMatrixTest, UpperTriangleWins) {
  MatrixXd a(2, 2);
  a << 1, 2, 7, 3;
  const SymMatrix s(a);
  EXPECT_EQ(s.matrix()(1, 0), 2.0);
  EXPECT_EQ(s.matrix(), s.matrix().transpose());
  EXPECT_THROW(SymMatrix(MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST(ConeTest, Psd) {
  std::mt19937_64 rng(1);
  EXPECT_TRUE(IsPsd(SymMatrix(MatrixXd::Identity(3, 3))));
  EXPECT_FALSE(IsPsd(SymMatrix(Eigen::Vector2d(1, -1).asDiagonal())));
  const MatrixXd b = testing::RandomMatrix(4, 2, &rng);
  EXPECT_TRUE(IsPsd(SymMatrix(b * b.transpose())));
}

TEST(ConeTest, Nonneg) {
  EXPECT_TRUE(IsEntrywiseNonneg(SymMatrix(MatrixXd::Ones(3, 3))));
  MatrixXd a(2, 2);
  a << 1, -1, -1, 1;
  EXPECT_FALSE(IsEntrywiseNonneg(SymMatrix(a)));
  EXPECT_TRUE(IsEntrywiseNonneg(SymMatrix(MatrixXd::Zero(2, 2))));
}

TEST(CopositivityTest, TwoByTwoExamples) {
  MatrixXd a(2, 2);
  a << 1, -1, -1, 1;
  EXPECT_EQ(CheckCopositivity(SymMatrix(a), 4).status, Copositivity::kCopositive);
  a << 0, -1, -1, 0;
  const CopositivityVerdict v = CheckCopositivity(SymMatrix(a), 4);
  ASSERT_EQ(v.status, Copositivity::kNotCopositive);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ(*v.witness, Eigen::Vector2d(1, 1));
  EXPECT_EQ(v.witness_value, -2.0);
}

// 2x2 verdicts against dense sampling of the simplex.
TEST(CopositivityTest, TwoByTwoIsExact) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const MatrixXd a = testing::RandomSymmetric(2, &rng);
    double sampled = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 20000; ++k) {
      const double s = k / 20000.0;
      const Eigen::Vector2d x(s, 1 - s);
      sampled = std::min(sampled, x.dot(a * x));
    }
    const CopositivityVerdict v = CheckCopositivity(SymMatrix(a), 0);
    ASSERT_NE(v.status, Copositivity::kUnknown);
    if (sampled < -1e-9) EXPECT_EQ(v.status, Copositivity::kNotCopositive) << a;
    if (sampled > 1e-9) EXPECT_EQ(v.status, Copositivity::kCopositive) << a;
  }
}

TEST(CopositivityTest, HornMatrix) {
  // The grid oracle at 2^6 subdivisions finds no negative value.
  EXPECT_GE(HornGridMinimum(64), 0);
  const SymMatrix h(Horn());
  for (int depth = 0; depth <= 7; ++depth) {
    EXPECT_NE(CheckCopositivity(h, depth).status, Copositivity::kNotCopositive) << depth;
  }
  EXPECT_FALSE(PsdPlusNnMembership(h));
  EXPECT_FALSE(IsPsd(h));
}

TEST(CopositivityTest, InclusionChainOnCompletelyPositive) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const SymMatrix a(RandomCompletelyPositive(1 + trial % 4, &rng));
    EXPECT_TRUE(IsPsd(a));
    EXPECT_TRUE(IsEntrywiseNonneg(a));
    EXPECT_TRUE(PsdPlusNnMembership(a));
    EXPECT_NE(CheckCopositivity(a, 5).status, Copositivity::kNotCopositive);
  }
}

TEST(CopositivityTest, PsdAndNonnegMembers) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd b = testing::RandomMatrix(4, 3, &rng);
    EXPECT_TRUE(PsdPlusNnMembership(SymMatrix(b * b.transpose())));
    const MatrixXd c = testing::RandomMatrix(4, 4, &rng).cwiseAbs();
    EXPECT_TRUE(PsdPlusNnMembership(SymMatrix(c + c.transpose())));
  }
  EXPECT_TRUE(PsdPlusNnMembership(SymMatrix(MatrixXd::Zero(3, 3))));
  EXPECT_FALSE(PsdPlusNnMembership(SymMatrix(-MatrixXd::Identity(3, 3))));
}

// Witness validity, depth monotonicity and (for n <= 4) agreement with the
// PSD + NN oracle.
TEST(CopositivityTest, SoundnessOnRandomMatrices) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + trial % 2;
    MatrixXd a = testing::RandomSymmetric(n, &rng);
    a.diagonal() = a.diagonal().cwiseAbs();
    const SymMatrix s(a);
    bool seen_not = false, seen_cop = false;
    for (int depth = 0; depth <= 5; ++depth) {
      const CopositivityVerdict v = CheckCopositivity(s, depth);
      if (seen_not) EXPECT_EQ(v.status, Copositivity::kNotCopositive);
      if (v.status == Copositivity::kNotCopositive) {
        seen_not = true;
        ASSERT_TRUE(v.witness.has_value());
        EXPECT_GE(v.witness->minCoeff(), 0.0);
        EXPECT_DOUBLE_EQ(v.witness->maxCoeff(), 1.0);
        EXPECT_LT(v.witness->dot(a * *v.witness), 0.0);
        EXPECT_DOUBLE_EQ(v.witness_value, v.witness->dot(s.matrix() * *v.witness));
      } else {
        EXPECT_FALSE(v.witness.has_value());
      }
      if (v.status == Copositivity::kCopositive) seen_cop = true;
    }
    EXPECT_FALSE(seen_not && seen_cop);
    const bool decomposable = PsdPlusNnMembership(s);
    if (seen_not) EXPECT_FALSE(decomposable);
    if (decomposable) EXPECT_FALSE(seen_not);
  }
}

}  // namespace
}  // namespace reluiqc
