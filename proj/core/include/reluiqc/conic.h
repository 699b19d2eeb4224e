#pragma once

/// @file
/// Small dense primal-dual interior-point solver for semidefinite programs
/// in inequality (LMI) form:
///
///   maximize    c'y
///   subject to  F0_k + sum_i y_i F_ik  >= 0   (PSD, k = 1..K)
///               g0_l + sum_i y_i g_il  >= 0   (scalar, l = 1..L)
///
/// The solver works on the standard primal/dual pair with the LMI form as the
/// "dual" side and uses the HKM search direction with Mehrotra
/// predictor-corrector steps. It is sized for the problems in this project
/// (a few hundred variables, blocks of dimension <= ~20).

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace reluiqc::conic {

/// Raised when a backend terminates abnormally or its answer is ambiguous.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// F(y) = constant + sum_i y_i * coefficient_i, required PSD.
struct LmiConstraint {
  Eigen::MatrixXd constant;
  std::vector<std::pair<int, Eigen::MatrixXd>> terms;
};

/// constant + sum_i y_i * coefficient_i >= 0.
struct LinearConstraint {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;
};

struct Program {
  int num_vars = 0;
  Eigen::VectorXd objective;  ///< maximized
  std::vector<LmiConstraint> lmis;
  std::vector<LinearConstraint> linear;
};

enum class Status {
  kOptimal,
  kMaxIterations,
  kNumericalFailure,
  kDiverged,  ///< iterates blew up; the problem is likely infeasible or unbounded
};

std::string to_string(Status status);

struct Options {
  /// Relative residual and duality-gap target.
  double tolerance = 1e-7;
  int max_iterations = 100;
  /// Bound on |y|, |X| above which the run is declared diverged.
  double divergence_bound = 1e10;
  /// Prints one line per iteration to stderr when true.
  bool verbose = false;
};

struct Solution {
  Status status = Status::kNumericalFailure;
  Eigen::VectorXd y;
  /// c'y at the returned point (achieved objective if the LMIs hold).
  double objective = 0.0;
  /// Weak-duality upper bound on the optimum, <C, X>; valid when the
  /// multiplier residual is small.
  double upper_bound = 0.0;
  double multiplier_residual = 0.0;  ///< relative, for the X side
  double slack_residual = 0.0;       ///< relative, for the y side
  double relative_gap = 0.0;
  int iterations = 0;
  std::string detail;
};

Solution Solve(const Program& program, const Options& options = {});

/// Evaluates every constraint at y and returns the smallest eigenvalue
/// (LMIs) or value (scalars) observed. Independent of the solver internals.
double MinConstraintValue(const Program& program, const Eigen::VectorXd& y);

}  // namespace reluiqc::conic
