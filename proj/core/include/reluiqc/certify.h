#pragma once

/// @file
/// Finite-gain l2 stability certificates for ReLU recurrent networks.
///
/// The network is stable if there are P >= 0, diagonal S > 0 and a valid
/// multiplier Pi with
///
///   blockdiag(-P, -S) + A' blockdiag(P, S) A + B' Pi B < 0,
///   A = [[Lambda, Win], [Wout, 0]],  B = [[Wout, 0], [0, I]].
///
/// Problems are solved as margin maximization (LMI <= -t I) and every
/// reported certificate is re-checked with independent eigenvalue tests.

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "reluiqc/affine.h"
#include "reluiqc/conic.h"
#include "reluiqc/dynamics.h"
#include "reluiqc/multipliers.h"

namespace reluiqc {

enum class TestId {
  kSG,           ///< small gain: Pi = 0, S = I
  kSSG,          ///< Test I: scaled small gain, Pi = 0
  kL2pSSG,       ///< Test II: Pi in the copositive-0 class
  kSsgZfPol,     ///< Test III: Zames-Falb + polytopic
  kSsgZfPolCop,  ///< Test IV: Zames-Falb + polytopic + copositive
};

inline constexpr TestId kAllTests[] = {TestId::kSG, TestId::kSSG, TestId::kL2pSSG, TestId::kSsgZfPol,
                                       TestId::kSsgZfPolCop};

/// Canonical names: SG, SSG, L2P_SSG, SSG_ZF_POL, SSG_ZF_POL_COP.
std::string to_string(TestId test);
/// Accepts canonical names and the roman aliases I, II, III, IV.
std::optional<TestId> ParseTestId(const std::string& text);

/// Multiplier family used by a test.
MultiplierFamily FamilyFor(TestId test, int m);
/// Whether the test pins S = I.
bool FreezesScaling(TestId test);

struct FeasibilityProblem {
  int n = 0;
  int m = 0;
  double eps = 0.0;
  double s_min = 0.0;
  bool s_frozen = false;
  /// "P", "S" (unless frozen) and the family blocks prefixed "pi.".
  VariableSet variables;
  /// Offset of the family's scalars inside the flat vector.
  int family_offset = 0;
  MultiplierFamily family;  ///< in its own (unshifted) indexing
  AffineMatrix lmi;         ///< (n+m) x (n+m), required <= -eps I

  /// Lowers to a margin-maximization program. The last program variable is
  /// the margin t (maximized, t <= 1). With S free, tr(P) + tr(S) <= n + m
  /// fixes the scale of the otherwise homogeneous problem.
  conic::Program ToProgram() const;
};

/// Default strictness margin for a model: 1e-6 * (1 + max |entry|).
double DefaultEps(const RnnModel& model);

FeasibilityProblem Assemble(const RnnModel& model, const MultiplierFamily& family, double eps,
                            double s_min, bool freeze_s = false);

struct Certificate {
  Eigen::MatrixXd p;
  Eigen::MatrixXd s;  ///< diagonal
  /// Family block values keyed by family block name.
  std::vector<std::pair<std::string, Eigen::MatrixXd>> multiplier;
  Eigen::MatrixXd pi;
  double margin = 0.0;  ///< -max eig of the LMI
  double eps = 0.0;
  double s_min = 0.0;
  bool s_frozen = false;
  double solve_ms = 0.0;

  /// Flat family assignment rebuilt from `multiplier`.
  Eigen::VectorXd FamilyAssignment(const MultiplierFamily& family) const;
};

enum class OutcomeKind { kFeasible, kInfeasible, kSolverFailure };
std::string to_string(OutcomeKind kind);

struct SolveOutcome {
  OutcomeKind kind = OutcomeKind::kSolverFailure;
  std::optional<Certificate> certificate;  ///< set iff kFeasible
  /// Upper bound on the achievable margin reported by the backend.
  double margin_upper_bound = 0.0;
  std::string detail;  ///< backend status text
  double solve_ms = 0.0;
};

struct SolverOptions {
  conic::Options backend;
  /// Cone/linear tolerance used when accepting a solver point.
  double tolerance = 1e-8;
};

SolveOutcome Solve(const FeasibilityProblem& problem, const SolverOptions& options = {});

struct VerificationReport {
  bool verified = false;
  double lmi_max_eig = 0.0;
  double worst_constraint_violation = 0.0;
  std::string reason;  ///< first failed check, empty when verified
};

/// Re-evaluates the stability LMI and every constraint at the certificate.
VerificationReport VerifyCertificate(const RnnModel& model, const MultiplierFamily& family,
                                     const Certificate& cert, double tol = 1e-8);

/// Evaluates the stability LMI for numeric P, S, Pi.
Eigen::MatrixXd StabilityLmi(const RnnModel& model, const Eigen::MatrixXd& p, const Eigen::MatrixXd& s,
                             const Eigen::MatrixXd& pi);

struct CertifyOptions {
  double eps = 0.0;  ///< <= 0 selects DefaultEps(model)
  double s_min = 1e-6;
  SolverOptions solver;
};

struct TestResult {
  TestId test = TestId::kSSG;
  OutcomeKind outcome = OutcomeKind::kSolverFailure;
  bool verified = false;
  double margin = 0.0;
  double solve_ms = 0.0;
  std::optional<Certificate> certificate;
  VerificationReport report;
  std::string detail;
};

/// Builds the test's family, assembles, solves and verifies. A Feasible
/// backend answer whose certificate fails verification is reported as
/// SolverFailure.
TestResult RunTest(const RnnModel& model, TestId test, const CertifyOptions& options = {});

/// Bound on ||[z; w]|| / ||[s; v]|| implied by a verified certificate:
/// sqrt(r^2 + (r + 1)^2) with r = nu / eps, the (eps, nu) pair chosen to make
/// r small. Throws
/// std::invalid_argument if the certificate's LMI is not negative definite.
double CertificateGainBound(const Certificate& cert, const RnnModel& model);

/// Realization of S^{1/2} G0 S^{-1/2} for diagonal S > 0.
RnnModel ScaledModel(const RnnModel& model, const Eigen::MatrixXd& s);

}  // namespace reluiqc
