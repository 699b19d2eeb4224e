#pragma once

/// @file
/// Static IQC multiplier families for the entrywise ReLU. Each family is a
/// set of named decision blocks, conic/linear constraints on them, and an
/// affine map to a symmetric Pi in S^{2m} such that
///
///   [xi; relu(xi)]' Pi [xi; relu(xi)] >= 0   for all xi in R^m
///
/// whenever the constraints hold.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reluiqc/affine.h"

namespace reluiqc {

/// Default cap on m for the polytopic family (2^m vertex LMIs).
inline constexpr int kDefaultVertexBudget = 12;

struct MultiplierFamily {
  std::string name;
  int m = 0;
  VariableSet variables;
  /// Each entry is required >= 0.
  std::vector<AffineScalar> linear;
  /// Each entry is required PSD.
  std::vector<AffineMatrix> lmis;
  /// Affine map to the 2m x 2m multiplier.
  AffineMatrix pi;

  int num_scalars() const { return variables.num_scalars(); }
  Eigen::MatrixXd Pi(const Eigen::VectorXd& x) const { return pi.Evaluate(x); }

  /// Largest violation over cone tags, linear constraints and LMIs; <= 0 when
  /// x is feasible. Diagonal-positive blocks must reach positive_floor.
  double WorstViolation(const Eigen::VectorXd& x, double positive_floor = 0.0) const;
};

/// Violation of a single block's cone tag (<= 0 when satisfied).
double ConeViolation(const VariableBlock& block, const Eigen::VectorXd& x, double positive_floor);

/// No variables, Pi = 0.
MultiplierFamily ZeroFamily(int m);

/// Static Zames-Falb multipliers for slope(mu, nu):
/// Pi = T' [[0, M'], [M, 0]] T, T = [[nu I, -I], [-mu I, I]], M doubly
/// hyperdominant.
MultiplierFamily ZamesFalbFamily(int m, double mu = 0.0, double nu = 1.0);

/// Linear constraints that make the square block named `name` doubly
/// hyperdominant: off-diagonal <= 0, row sums >= 0, column sums >= 0.
std::vector<AffineScalar> DoublyHyperdominantConstraints(const VariableBlock& block);

/// Polytopic bounding multipliers for sector [alpha, beta]:
/// Pi = [[X, Y], [Y', Z]] with X + Y D + D Y' + D Z D >= margin I on every
/// diagonal vertex D in {alpha, beta}^m and Z_ii <= 0.
MultiplierFamily PolytopicFamily(int m, double alpha = 0.0, double beta = 1.0, double margin = 0.0,
                                 int vertex_budget = kDefaultVertexBudget);

/// Diagonally structured sector multipliers:
/// Pi = [[-alpha beta D, (alpha+beta)/2 D], [(alpha+beta)/2 D, -D]], D > 0 diagonal.
MultiplierFamily DiagSectorFamily(int m, double alpha = 0.0, double beta = 1.0);

/// Copositive multipliers with the PSD + NN inner approximation:
/// Pi = R' (Q1 + Q2) R, R = [[-I, I], [0, I]], Q1 PSD, Q2 entrywise >= 0.
MultiplierFamily CopositiveFamily(int m);

/// Pi = [[0, 0], [0, Qh1 + Qh2]], Qh1 PSD, Qh2 entrywise >= 0 (m x m).
MultiplierFamily Cop0Family(int m);

/// Minkowski sum. Blocks of family k are renamed "f<k>.<name>"; constraints
/// are concatenated and the Pi maps added.
MultiplierFamily FamilySum(const std::vector<MultiplierFamily>& families);

/// The 2m x 2m matrix R = [[-I, I], [0, I]] used by the copositive families.
Eigen::MatrixXd CopositiveTransform(int m);

/// [xi; relu(xi)]' Pi [xi; relu(xi)].
double PointwiseIqcValue(const Eigen::MatrixXd& pi, const Eigen::VectorXd& xi);

}  // namespace reluiqc
