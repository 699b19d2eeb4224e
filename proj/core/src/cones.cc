#include "reluiqc/cones.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "reluiqc/conic.h"

namespace reluiqc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Simplex grid points per level are capped at this count.
constexpr double kGridBudget = 4e6;

double MinEigenvalue(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

double Binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

CopositivityVerdict NotCopositive(VectorXd x, const MatrixXd& a) {
  x /= x.maxCoeff();
  CopositivityVerdict v;
  v.status = Copositivity::kNotCopositive;
  v.witness_value = x.dot(a * x);
  v.witness = std::move(x);
  return v;
}

CopositivityVerdict Verdict(Copositivity status) {
  CopositivityVerdict v;
  v.status = status;
  return v;
}

// Minimizes x'Ax over x = k/N on the unit simplex; returns the best point.
std::pair<double, VectorXd> GridMinimum(const MatrixXd& a, int subdivisions) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  double best = std::numeric_limits<double>::infinity();
  VectorXd best_x = VectorXd::Zero(n);
  VectorXd x(n);
  std::function<void(int, int)> recurse = [&](int index, int remaining) {
    if (index == n - 1) {
      counts[static_cast<std::size_t>(index)] = remaining;
      for (int i = 0; i < n; ++i) x(i) = static_cast<double>(counts[static_cast<std::size_t>(i)]) / subdivisions;
      const double value = x.dot(a * x);
      if (value < best) {
        best = value;
        best_x = x;
      }
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[static_cast<std::size_t>(index)] = c;
      recurse(index + 1, remaining - c);
    }
  };
  recurse(0, subdivisions);
  return {best, best_x};
}

}  // namespace

SymMatrix::SymMatrix(const MatrixXd& a) : a_(a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("SymMatrix: matrix must be square");
  a_.triangularView<Eigen::StrictlyLower>() = a.transpose().triangularView<Eigen::StrictlyLower>();
}

bool IsPsd(const SymMatrix& a, double tol) {
  if (a.dim() == 0) return true;
  return MinEigenvalue(a.matrix()) >= -tol;
}

bool IsEntrywiseNonneg(const SymMatrix& a, double tol) {
  if (a.dim() == 0) return true;
  return a.matrix().minCoeff() >= -tol;
}

CopositivityVerdict CheckCopositivity(const SymMatrix& sym, int depth) {
  const MatrixXd& a = sym.matrix();
  const int n = sym.dim();
  if (n == 0) return Verdict(Copositivity::kCopositive);
  for (int i = 0; i < n; ++i) {
    if (a(i, i) < 0.0) return NotCopositive(VectorXd::Unit(n, i), a);
  }
  if (a.minCoeff() >= 0.0) return Verdict(Copositivity::kCopositive);
  if (n == 2) {
    // [[p, q], [q, r]] with p, r >= 0 is copositive iff q >= -sqrt(p r).
    const double p = a(0, 0), q = a(0, 1), r = a(1, 1);
    if (q >= -std::sqrt(p * r)) return Verdict(Copositivity::kCopositive);
    // Minimize f(s) = [s, 1-s] A [s, 1-s]' on [0, 1].
    const double curvature = p - 2.0 * q + r;
    double s = 0.5;
    if (curvature > 0.0) s = std::clamp((r - q) / curvature, 0.0, 1.0);
    VectorXd x(2);
    x << s, 1.0 - s;
    if (x.dot(a * x) >= 0.0) x << 1.0, 1.0;
    return NotCopositive(x, a);
  }
  const double scale = a.cwiseAbs().maxCoeff();
  if (MinEigenvalue(a) >= -1e-12 * scale) return Verdict(Copositivity::kCopositive);

  for (int level = 0; level <= depth; ++level) {
    const int subdivisions = 1 << std::min(level, 20);
    if (Binomial(subdivisions + n - 1, n - 1) > kGridBudget) break;
    auto [value, x] = GridMinimum(a, subdivisions);
    if (value < -1e-13 * scale) return NotCopositive(x, a);
  }
  try {
    if (PsdPlusNnMembership(sym)) return Verdict(Copositivity::kCopositive);
  } catch (const conic::SolverFailure&) {
  }
  return Verdict(Copositivity::kUnknown);
}

bool PsdPlusNnMembership(const SymMatrix& sym, double tol) {
  const int n = sym.dim();
  const double scale = n > 0 ? sym.matrix().cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return true;
  const MatrixXd a = sym.matrix() / scale;
  if (IsPsd(SymMatrix(a), tol) || IsEntrywiseNonneg(SymMatrix(a))) return true;

  // maximize t  s.t.  A - Q2 - t I >= 0,  Q2 >= 0 entrywise,  t <= 1.
  conic::Program prog;
  const int nq = n * (n + 1) / 2;
  prog.num_vars = nq + 1;
  prog.objective = VectorXd::Zero(prog.num_vars);
  prog.objective(nq) = 1.0;
  conic::LmiConstraint lmi{a, {}};
  int var = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j, ++var) {
      MatrixXd e = MatrixXd::Zero(n, n);
      e(i, j) = e(j, i) = -1.0;
      lmi.terms.emplace_back(var, e);
      prog.linear.push_back({0.0, {{var, 1.0}}});
    }
  }
  lmi.terms.emplace_back(nq, -MatrixXd::Identity(n, n));
  prog.lmis.push_back(std::move(lmi));
  prog.linear.push_back({1.0, {{nq, -1.0}}});

  const conic::Solution sol = conic::Solve(prog);
  if (sol.y.size() == prog.num_vars && sol.y.allFinite()) {
    MatrixXd q2 = MatrixXd::Zero(n, n);
    var = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) q2(i, j) = q2(j, i) = std::max(sol.y(var++), 0.0);
    }
    if (MinEigenvalue(a - q2) >= -tol) return true;
  }
  if (sol.status == conic::Status::kOptimal && sol.upper_bound < -tol) return false;
  throw conic::SolverFailure("PsdPlusNnMembership: inconclusive backend result (" +
                             conic::to_string(sol.status) + ", bound " + std::to_string(sol.upper_bound) +
                             ")");
}

}  // namespace reluiqc
