#include "reluiqc/certify.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace reluiqc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr const char* kFamilyPrefix = "pi.";

MatrixXd Symmetrized(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

double MaxEigenvalue(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Symmetrized(a), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(a.rows() - 1);
}

double MinEigenvalue(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Symmetrized(a), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

conic::LmiConstraint ToLmi(const AffineMatrix& expr, double scale = 1.0) {
  conic::LmiConstraint out{scale * expr.constant(), {}};
  out.terms.reserve(expr.terms().size());
  for (const auto& [var, coeff] : expr.terms()) out.terms.emplace_back(var, scale * coeff);
  return out;
}

conic::LinearConstraint ToLinear(const AffineScalar& expr) {
  conic::LinearConstraint out{expr.constant, {}};
  for (const auto& [var, coeff] : expr.terms) out.terms.emplace_back(var, coeff);
  return out;
}

// (A, B) factors of the stability LMI.
std::pair<MatrixXd, MatrixXd> LmiFactors(const RnnModel& model) {
  const int n = model.n(), m = model.m();
  MatrixXd a = MatrixXd::Zero(n + m, n + m);
  a << model.lambda(), model.win(), model.wout(), MatrixXd::Zero(m, m);
  MatrixXd b = MatrixXd::Zero(2 * m, n + m);
  b.topLeftCorner(m, n) = model.wout();
  b.bottomRightCorner(m, m) = MatrixXd::Identity(m, m);
  return {a, b};
}

}  // namespace

std::string to_string(TestId test) {
  switch (test) {
    case TestId::kSG:
      return "SG";
    case TestId::kSSG:
      return "SSG";
    case TestId::kL2pSSG:
      return "L2P_SSG";
    case TestId::kSsgZfPol:
      return "SSG_ZF_POL";
    case TestId::kSsgZfPolCop:
      return "SSG_ZF_POL_COP";
  }
  return "?";
}

std::optional<TestId> ParseTestId(const std::string& text) {
  if (text == "SG") return TestId::kSG;
  if (text == "SSG" || text == "I") return TestId::kSSG;
  if (text == "L2P_SSG" || text == "II") return TestId::kL2pSSG;
  if (text == "SSG_ZF_POL" || text == "III") return TestId::kSsgZfPol;
  if (text == "SSG_ZF_POL_COP" || text == "IV") return TestId::kSsgZfPolCop;
  return std::nullopt;
}

MultiplierFamily FamilyFor(TestId test, int m) {
  switch (test) {
    case TestId::kSG:
    case TestId::kSSG:
      return ZeroFamily(m);
    case TestId::kL2pSSG:
      return Cop0Family(m);
    case TestId::kSsgZfPol:
      return FamilySum({ZamesFalbFamily(m), PolytopicFamily(m)});
    case TestId::kSsgZfPolCop:
      return FamilySum({ZamesFalbFamily(m), PolytopicFamily(m), CopositiveFamily(m)});
  }
  throw std::invalid_argument("FamilyFor: unknown test");
}

bool FreezesScaling(TestId test) { return test == TestId::kSG; }

std::string to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kFeasible:
      return "Feasible";
    case OutcomeKind::kInfeasible:
      return "Infeasible";
    case OutcomeKind::kSolverFailure:
      return "SolverFailure";
  }
  return "?";
}

double DefaultEps(const RnnModel& model) { return 1e-6 * (1.0 + model.DataScale()); }

FeasibilityProblem Assemble(const RnnModel& model, const MultiplierFamily& family, double eps,
                            double s_min, bool freeze_s) {
  if (family.m != model.m()) throw std::invalid_argument("Assemble: family m does not match model m");
  if (!(eps > 0.0) || !(s_min > 0.0)) throw std::invalid_argument("Assemble: eps and s_min must be positive");
  const int n = model.n(), m = model.m();

  FeasibilityProblem prob;
  prob.n = n;
  prob.m = m;
  prob.eps = eps;
  prob.s_min = s_min;
  prob.s_frozen = freeze_s;
  prob.family = family;

  const AffineMatrix p = prob.variables.Add("P", BlockKind::kSymmetric, n, ConeTag::kPsd).Expression();
  const AffineMatrix s = freeze_s ? AffineMatrix(MatrixXd::Identity(m, m))
                                  : prob.variables.Add("S", BlockKind::kDiagonal, m, ConeTag::kFree).Expression();
  prob.family_offset = prob.variables.Append(family.variables, kFamilyPrefix);

  const auto [a, b] = LmiFactors(model);
  const AffineMatrix zero_nm = AffineMatrix::Zero(n, m);
  const AffineMatrix storage = AffineMatrix::Blocks(p, zero_nm, zero_nm.Transpose(), s);
  const AffineMatrix negated = AffineMatrix::Blocks(-1.0 * p, zero_nm, zero_nm.Transpose(), -1.0 * s);
  prob.lmi = negated + storage.Congruence(a) + family.pi.Shifted(prob.family_offset).Congruence(b);
  return prob;
}

conic::Program FeasibilityProblem::ToProgram() const {
  conic::Program prog;
  const int nx = variables.num_scalars();
  const int t = nx;
  prog.num_vars = nx + 1;
  prog.objective = VectorXd::Zero(prog.num_vars);
  prog.objective(t) = 1.0;

  conic::LmiConstraint stability = ToLmi(lmi, -1.0);
  stability.terms.emplace_back(t, -MatrixXd::Identity(lmi.rows(), lmi.rows()));
  prog.lmis.push_back(std::move(stability));

  const double floor = s_min;
  for (const auto& blk : variables.blocks()) {
    const bool is_scaling = blk.name == "S";
    switch (blk.cone) {
      case ConeTag::kPsd:
        prog.lmis.push_back(ToLmi(blk.Expression()));
        break;
      case ConeTag::kNonnegative:
        for (int k = 0; k < blk.size(); ++k) prog.linear.push_back({0.0, {{blk.offset + k, 1.0}}});
        break;
      case ConeTag::kDiagPositive:
        for (int k = 0; k < blk.size(); ++k) prog.linear.push_back({-floor, {{blk.offset + k, 1.0}}});
        break;
      case ConeTag::kFree:
        break;
    }
    if (is_scaling) {
      for (int k = 0; k < blk.size(); ++k) prog.linear.push_back({-s_min, {{blk.offset + k, 1.0}}});
    }
  }
  for (const auto& lin : family.linear) prog.linear.push_back(ToLinear(lin.Shifted(family_offset)));
  for (const auto& fam_lmi : family.lmis) prog.lmis.push_back(ToLmi(fam_lmi.Shifted(family_offset)));

  prog.linear.push_back({1.0, {{t, -1.0}}});
  if (!s_frozen && variables.Contains("S")) {
    // tr(P) + tr(S) <= n + m.
    conic::LinearConstraint scale{static_cast<double>(n + m), {}};
    if (variables.Contains("P")) {
      int var = variables.Find("P").offset;
      for (int i = 0; i < n; ++i) {
        scale.terms.emplace_back(var, -1.0);
        var += n - i;
      }
    }
    const VariableBlock& sblk = variables.Find("S");
    for (int i = 0; i < m; ++i) scale.terms.emplace_back(sblk.offset + i, -1.0);
    prog.linear.push_back(std::move(scale));
  }
  return prog;
}

VectorXd Certificate::FamilyAssignment(const MultiplierFamily& family) const {
  VectorXd x = VectorXd::Zero(family.num_scalars());
  for (const auto& blk : family.variables.blocks()) {
    auto it = std::find_if(multiplier.begin(), multiplier.end(),
                           [&](const auto& entry) { return entry.first == blk.name; });
    if (it == multiplier.end()) {
      throw std::invalid_argument("Certificate: missing multiplier block '" + blk.name + "'");
    }
    blk.Assign(it->second, &x);
  }
  return x;
}

MatrixXd StabilityLmi(const RnnModel& model, const MatrixXd& p, const MatrixXd& s, const MatrixXd& pi) {
  const int n = model.n(), m = model.m();
  if (p.rows() != n || p.cols() != n || s.rows() != m || s.cols() != m || pi.rows() != 2 * m ||
      pi.cols() != 2 * m) {
    throw std::invalid_argument("StabilityLmi: dimension mismatch");
  }
  const auto [a, b] = LmiFactors(model);
  MatrixXd storage = MatrixXd::Zero(n + m, n + m);
  storage.topLeftCorner(n, n) = p;
  storage.bottomRightCorner(m, m) = s;
  return Symmetrized(-storage + a.transpose() * storage * a + b.transpose() * pi * b);
}

SolveOutcome Solve(const FeasibilityProblem& problem, const SolverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const conic::Program prog = problem.ToProgram();
  const conic::Solution sol = conic::Solve(prog, options.backend);
  SolveOutcome out;
  out.solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out.margin_upper_bound = sol.upper_bound;
  out.detail = conic::to_string(sol.status) + (sol.detail.empty() ? "" : ": " + sol.detail);

  if (sol.y.size() == prog.num_vars && sol.y.allFinite()) {
    const VectorXd x = sol.y.head(problem.variables.num_scalars());
    Certificate cert;
    const auto& vars = problem.variables;
    cert.p = vars.Contains("P") ? vars.Find("P").Value(x) : MatrixXd::Zero(problem.n, problem.n);
    cert.s = vars.Contains("S") ? vars.Find("S").Value(x) : MatrixXd::Identity(problem.m, problem.m);
    const VectorXd fam_x = x.segment(problem.family_offset, problem.family.num_scalars());
    for (const auto& blk : problem.family.variables.blocks()) cert.multiplier.emplace_back(blk.name, blk.Value(fam_x));
    cert.pi = problem.family.Pi(fam_x);
    cert.margin = -MaxEigenvalue(problem.lmi.Evaluate(x));
    cert.eps = problem.eps;
    cert.s_min = problem.s_min;
    cert.s_frozen = problem.s_frozen;
    cert.solve_ms = out.solve_ms;

    double worst = problem.family.WorstViolation(fam_x, problem.s_min);
    if (cert.p.size() > 0) worst = std::max(worst, -MinEigenvalue(cert.p));
    if (vars.Contains("S")) worst = std::max(worst, problem.s_min - cert.s.diagonal().minCoeff());
    if (cert.margin >= problem.eps && worst <= options.tolerance) {
      out.kind = OutcomeKind::kFeasible;
      out.certificate = std::move(cert);
      return out;
    }
  }
  if (sol.status == conic::Status::kOptimal && sol.upper_bound < problem.eps) {
    out.kind = OutcomeKind::kInfeasible;
    return out;
  }
  out.kind = OutcomeKind::kSolverFailure;
  if (sol.status == conic::Status::kOptimal) {
    out.detail += "; margin bound " + std::to_string(sol.upper_bound) + " straddles eps";
  }
  return out;
}

VerificationReport VerifyCertificate(const RnnModel& model, const MultiplierFamily& family,
                                     const Certificate& cert, double tol) {
  const int n = model.n(), m = model.m();
  if (family.m != m || cert.p.rows() != n || cert.p.cols() != n || cert.s.rows() != m || cert.s.cols() != m) {
    throw std::invalid_argument("VerifyCertificate: dimension mismatch");
  }
  VerificationReport report;
  const VectorXd x = cert.FamilyAssignment(family);
  const MatrixXd pi = family.Pi(x);
  report.lmi_max_eig = MaxEigenvalue(StabilityLmi(model, cert.p, cert.s, pi));

  double worst = family.WorstViolation(x, cert.s_min);
  std::string reason = worst > tol ? "multiplier constraint violated" : "";
  const double p_violation = -MinEigenvalue(cert.p);
  if (p_violation > tol && reason.empty()) reason = "P is not positive semidefinite";
  worst = std::max(worst, p_violation);
  const MatrixXd off_diag = cert.s - MatrixXd(cert.s.diagonal().asDiagonal());
  double s_violation = std::max(cert.s_min - cert.s.diagonal().minCoeff(), off_diag.cwiseAbs().maxCoeff());
  if (cert.s_frozen) s_violation = (cert.s - MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  if (s_violation > tol && reason.empty()) reason = "S is not an admissible diagonal scaling";
  worst = std::max(worst, s_violation);
  report.worst_constraint_violation = std::max(0.0, worst);

  if (report.lmi_max_eig > -0.5 * cert.eps && reason.empty()) {
    reason = "stability LMI is not negative definite with margin eps/2";
  }
  report.reason = reason;
  report.verified = reason.empty();
  return report;
}

TestResult RunTest(const RnnModel& model, TestId test, const CertifyOptions& options) {
  const double eps = options.eps > 0.0 ? options.eps : DefaultEps(model);
  const MultiplierFamily family = FamilyFor(test, model.m());
  const FeasibilityProblem problem = Assemble(model, family, eps, options.s_min, FreezesScaling(test));
  const SolveOutcome outcome = Solve(problem, options.solver);

  TestResult result;
  result.test = test;
  result.solve_ms = outcome.solve_ms;
  result.detail = outcome.detail;
  result.outcome = outcome.kind;
  if (outcome.kind == OutcomeKind::kFeasible) {
    result.report = VerifyCertificate(model, family, *outcome.certificate, options.solver.tolerance);
    result.verified = result.report.verified;
    if (result.verified) {
      result.margin = outcome.certificate->margin;
      result.certificate = outcome.certificate;
    } else {
      result.outcome = OutcomeKind::kSolverFailure;
      result.detail = "certificate failed verification: " + result.report.reason;
    }
  }
  return result;
}

double CertificateGainBound(const Certificate& cert, const RnnModel& model) {
  const int n = model.n(), m = model.m();
  const MatrixXd a0 = StabilityLmi(model, cert.p, cert.s, cert.pi);
  if (MaxEigenvalue(a0) >= 0.0) {
    throw std::invalid_argument("CertificateGainBound: certificate LMI is not negative definite");
  }
  const int nw = n + m;
  // Blocks of M0 over (x, w | v, s).
  MatrixXd e1 = MatrixXd::Zero(n + m, 2 * nw);
  e1 << model.lambda(), model.win(), MatrixXd::Identity(n, n), MatrixXd::Zero(n, m), model.wout(),
      MatrixXd::Zero(m, m), MatrixXd::Zero(m, n), MatrixXd::Identity(m, m);
  MatrixXd e2 = MatrixXd::Zero(2 * m, 2 * nw);
  e2.block(0, 0, m, n) = model.wout();
  e2.block(0, 2 * n + m, m, m) = MatrixXd::Identity(m, m);
  e2.block(m, n, m, m) = MatrixXd::Identity(m, m);
  MatrixXd storage = MatrixXd::Zero(n + m, n + m);
  storage.topLeftCorner(n, n) = cert.p;
  storage.bottomRightCorner(m, m) = cert.s;
  MatrixXd m0 = e1.transpose() * storage * e1 + e2.transpose() * cert.pi * e2;
  m0.topLeftCorner(n + m, n + m) -= storage;
  m0 = Symmetrized(m0);
  const MatrixXd b = m0.topRightCorner(nw, nw);
  const MatrixXd d = m0.bottomRightCorner(nw, nw);
  MatrixXd k = MatrixXd::Zero(nw, nw);
  k.topLeftCorner(n, n) = model.wout().transpose() * model.wout();

  // A(e) = A0 + e K < 0 for e < e_max.
  Eigen::LLT<MatrixXd> neg(-a0);
  MatrixXd lk = neg.matrixL().solve(k);
  lk = neg.matrixL().solve(lk.transpose()).transpose();
  const double kmax = MaxEigenvalue(lk);
  const double e_max = kmax > 0.0 ? 1.0 / kmax : 1e8;

  // nu^2 must exceed h(e) = lambda_max(D - B' A(e)^{-1} B).
  auto h = [&](double e) {
    const MatrixXd ae = a0 + e * k;
    Eigen::LLT<MatrixXd> llt(-ae);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    return MaxEigenvalue(d + b.transpose() * llt.solve(b));
  };
  auto ratio2 = [&](double log_e) {
    const double e = std::exp(log_e);
    return h(e) / e;
  };
  double lo = std::log(e_max) - 40.0, hi = std::log(e_max * (1.0 - 1e-9));
  // Coarse scan, then golden-section refinement around the best sample.
  constexpr int kScan = 200;
  double best_log = hi, best = ratio2(hi);
  for (int i = 0; i <= kScan; ++i) {
    const double le = lo + (hi - lo) * i / kScan;
    const double r = ratio2(le);
    if (r < best) best = r, best_log = le;
  }
  const double step = (hi - lo) / kScan;
  double left = std::max(lo, best_log - step), right = std::min(hi, best_log + step);
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int iter = 0; iter < 80; ++iter) {
    const double c1 = right - golden * (right - left), c2 = left + golden * (right - left);
    if (ratio2(c1) < ratio2(c2)) {
      right = c2;
    } else {
      left = c1;
    }
  }
  double e = std::exp(0.5 * (left + right));
  if (!(ratio2(std::log(e)) <= best)) e = std::exp(best_log);

  // Pick nu^2 just above h(e) and confirm M(eps, nu) < 0 directly.
  double nu2 = std::max(h(e), 0.0) * (1.0 + 1e-9) + 1e-12;
  for (int attempt = 0; attempt < 60; ++attempt) {
    MatrixXd full = m0;
    full.topLeftCorner(nw, nw) += e * k;
    full.bottomRightCorner(nw, nw) -= nu2 * MatrixXd::Identity(nw, nw);
    if (MaxEigenvalue(full) < 0.0) {
      // ||z|| <= r ||[s; v]|| and ||w|| <= ||z|| + ||s||.
      const double r = std::sqrt(nu2 / e);
      return std::sqrt(r * r + (r + 1.0) * (r + 1.0));
    }
    nu2 = nu2 * 2.0 + 1e-12;
  }
  throw std::runtime_error("CertificateGainBound: could not confirm M(eps, nu) < 0");
}

RnnModel ScaledModel(const RnnModel& model, const MatrixXd& s) {
  const VectorXd d = s.diagonal();
  if (d.size() != model.m() || (d.array() <= 0.0).any()) {
    throw std::invalid_argument("ScaledModel: S must be positive diagonal of size m");
  }
  const VectorXd root = d.cwiseSqrt();
  return RnnModel(model.lambda(), model.win() * root.cwiseInverse().asDiagonal(),
                  root.asDiagonal() * model.wout());
}

}  // namespace reluiqc
