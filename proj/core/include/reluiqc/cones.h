#pragma once

/// @file
/// Membership tests for the cones of symmetric matrices:
///   CP  (completely positive)  subset DNN subset PSD subset PSD+NN subset COP.
/// Copositivity is co-NP complete, so the copositivity check is three-valued.

#include <optional>

#include <Eigen/Dense>

namespace reluiqc {

/// Symmetric matrix; the upper triangle of the input is authoritative.
class SymMatrix {
 public:
  explicit SymMatrix(const Eigen::MatrixXd& a);

  const Eigen::MatrixXd& matrix() const { return a_; }
  int dim() const { return static_cast<int>(a_.rows()); }

 private:
  Eigen::MatrixXd a_;
};

inline constexpr double kEigenTolerance = 1e-9;
inline constexpr double kEntryTolerance = 1e-12;
inline constexpr double kFeasibilityTolerance = 1e-8;

bool IsPsd(const SymMatrix& a, double tol = kEigenTolerance);
bool IsEntrywiseNonneg(const SymMatrix& a, double tol = kEntryTolerance);

enum class Copositivity { kCopositive, kNotCopositive, kUnknown };

struct CopositivityVerdict {
  Copositivity status = Copositivity::kUnknown;
  /// Nonnegative x with x'Ax < 0, scaled to max entry 1; set iff NotCopositive.
  std::optional<Eigen::VectorXd> witness;
  double witness_value = 0.0;
};

/// Exact for n <= 2. For n >= 3, searches the simplex grid with 2^d
/// subdivisions for d = 0..depth (stopping early once the grid grows past
/// an internal point budget) and reports NotCopositive on any negative
/// sample. Copositive is reported only on a sufficient certificate:
/// entrywise nonnegative, PSD, or a PSD + NN decomposition.
CopositivityVerdict CheckCopositivity(const SymMatrix& a, int depth);

/// Whether A = Q1 + Q2 with Q1 PSD and Q2 symmetric entrywise nonnegative,
/// decided with the conic backend. Throws conic::SolverFailure when the
/// backend does not produce a conclusive answer.
bool PsdPlusNnMembership(const SymMatrix& a, double tol = kFeasibilityTolerance);

}  // namespace reluiqc
