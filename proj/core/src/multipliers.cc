#include "reluiqc/multipliers.h"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace reluiqc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double MinEigenvalue(const MatrixXd& a) {
  if (a.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

void RequireDimension(int m) {
  if (m < 1) throw std::invalid_argument("multiplier family: m must be >= 1");
}

void RequireSector(double lower, double upper, const char* what) {
  if (lower > 0.0 || upper < 0.0) {
    throw std::invalid_argument(std::string(what) + ": requires lower <= 0 <= upper");
  }
}

}  // namespace

double ConeViolation(const VariableBlock& block, const VectorXd& x, double positive_floor) {
  const MatrixXd value = block.Value(x);
  switch (block.cone) {
    case ConeTag::kFree:
      return -std::numeric_limits<double>::infinity();
    case ConeTag::kPsd:
      return -MinEigenvalue(value);
    case ConeTag::kNonnegative:
      return -value.minCoeff();
    case ConeTag::kDiagPositive:
      return positive_floor - value.diagonal().minCoeff();
  }
  return 0.0;
}

double MultiplierFamily::WorstViolation(const VectorXd& x, double positive_floor) const {
  if (x.size() != num_scalars()) {
    throw std::invalid_argument("MultiplierFamily: assignment has " + std::to_string(x.size()) +
                                " scalars, expected " + std::to_string(num_scalars()));
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& blk : variables.blocks()) {
    worst = std::max(worst, ConeViolation(blk, x, positive_floor));
  }
  for (const auto& lin : linear) worst = std::max(worst, -lin.Evaluate(x));
  for (const auto& lmi : lmis) worst = std::max(worst, -MinEigenvalue(lmi.Evaluate(x)));
  return worst;
}

MultiplierFamily ZeroFamily(int m) {
  RequireDimension(m);
  MultiplierFamily fam;
  fam.name = "zero";
  fam.m = m;
  fam.pi = AffineMatrix::Zero(2 * m, 2 * m);
  return fam;
}

std::vector<AffineScalar> DoublyHyperdominantConstraints(const VariableBlock& block) {
  if (block.kind != BlockKind::kSquare) {
    throw std::invalid_argument("DoublyHyperdominantConstraints: block must be square");
  }
  const int m = block.dim;
  auto entry = [&](int i, int j) { return block.offset + i * m + j; };
  std::vector<AffineScalar> out;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i != j) out.push_back({0.0, {{entry(i, j), -1.0}}});
    }
  }
  for (int i = 0; i < m; ++i) {
    AffineScalar row, col;
    for (int j = 0; j < m; ++j) {
      row.terms[entry(i, j)] = 1.0;
      col.terms[entry(j, i)] = 1.0;
    }
    out.push_back(row);
    out.push_back(col);
  }
  return out;
}

MultiplierFamily ZamesFalbFamily(int m, double mu, double nu) {
  RequireDimension(m);
  RequireSector(mu, nu, "ZamesFalbFamily");
  MultiplierFamily fam;
  fam.name = "zames_falb";
  fam.m = m;
  const VariableBlock& mblk = fam.variables.Add("M", BlockKind::kSquare, m, ConeTag::kFree);
  fam.linear = DoublyHyperdominantConstraints(mblk);

  const AffineMatrix mexpr = mblk.Expression();
  const AffineMatrix zero = AffineMatrix::Zero(m, m);
  const AffineMatrix inner = AffineMatrix::Blocks(zero, mexpr.Transpose(), mexpr, zero);
  const MatrixXd id = MatrixXd::Identity(m, m);
  MatrixXd t(2 * m, 2 * m);
  t << nu * id, -id, -mu * id, id;
  fam.pi = inner.Congruence(t);
  return fam;
}

MultiplierFamily PolytopicFamily(int m, double alpha, double beta, double margin, int vertex_budget) {
  RequireDimension(m);
  RequireSector(alpha, beta, "PolytopicFamily");
  if (m > vertex_budget) {
    throw std::invalid_argument("PolytopicFamily: m = " + std::to_string(m) +
                                " exceeds the vertex budget " + std::to_string(vertex_budget) +
                                " (2^m vertex LMIs)");
  }
  MultiplierFamily fam;
  fam.name = "polytopic";
  fam.m = m;
  const AffineMatrix x = fam.variables.Add("X", BlockKind::kSymmetric, m, ConeTag::kFree).Expression();
  const AffineMatrix y = fam.variables.Add("Y", BlockKind::kSquare, m, ConeTag::kFree).Expression();
  const VariableBlock& zblk = fam.variables.Add("Z", BlockKind::kSymmetric, m, ConeTag::kFree);
  const AffineMatrix z = zblk.Expression();
  fam.pi = AffineMatrix::Blocks(x, y, y.Transpose(), z);

  const MatrixXd id = MatrixXd::Identity(m, m);
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    VectorXd d(m);
    for (int i = 0; i < m; ++i) d(i) = (mask >> i) & 1u ? beta : alpha;
    MatrixXd lift(2 * m, m);
    lift << id, MatrixXd(d.asDiagonal());
    AffineMatrix vertex = fam.pi.Congruence(lift);
    vertex -= AffineMatrix(margin * id);
    fam.lmis.push_back(std::move(vertex));
  }
  // Z_ii <= 0; diagonal scalars of a symmetric block sit at row-major
  // upper-triangle positions.
  int var = zblk.offset;
  for (int i = 0; i < m; ++i) {
    fam.linear.push_back({0.0, {{var, -1.0}}});
    var += m - i;
  }
  return fam;
}

MultiplierFamily DiagSectorFamily(int m, double alpha, double beta) {
  RequireDimension(m);
  RequireSector(alpha, beta, "DiagSectorFamily");
  MultiplierFamily fam;
  fam.name = "diag_sector";
  fam.m = m;
  const AffineMatrix d = fam.variables.Add("D", BlockKind::kDiagonal, m, ConeTag::kDiagPositive).Expression();
  const double mid = 0.5 * (alpha + beta);
  fam.pi = AffineMatrix::Blocks((-alpha * beta) * d, mid * d, mid * d, -1.0 * d);
  return fam;
}

MatrixXd CopositiveTransform(int m) {
  const MatrixXd id = MatrixXd::Identity(m, m);
  MatrixXd r(2 * m, 2 * m);
  r << -id, id, MatrixXd::Zero(m, m), id;
  return r;
}

MultiplierFamily CopositiveFamily(int m) {
  RequireDimension(m);
  MultiplierFamily fam;
  fam.name = "copositive";
  fam.m = m;
  const AffineMatrix q1 = fam.variables.Add("Q1", BlockKind::kSymmetric, 2 * m, ConeTag::kPsd).Expression();
  const AffineMatrix q2 =
      fam.variables.Add("Q2", BlockKind::kSymmetric, 2 * m, ConeTag::kNonnegative).Expression();
  fam.pi = (q1 + q2).Congruence(CopositiveTransform(m));
  return fam;
}

MultiplierFamily Cop0Family(int m) {
  RequireDimension(m);
  MultiplierFamily fam;
  fam.name = "copositive0";
  fam.m = m;
  const AffineMatrix q1 = fam.variables.Add("Qh1", BlockKind::kSymmetric, m, ConeTag::kPsd).Expression();
  const AffineMatrix q2 =
      fam.variables.Add("Qh2", BlockKind::kSymmetric, m, ConeTag::kNonnegative).Expression();
  const AffineMatrix zero = AffineMatrix::Zero(m, m);
  fam.pi = AffineMatrix::Blocks(zero, zero, zero, q1 + q2).Congruence(CopositiveTransform(m));
  return fam;
}

MultiplierFamily FamilySum(const std::vector<MultiplierFamily>& families) {
  if (families.empty()) throw std::invalid_argument("FamilySum: empty list");
  const int m = families.front().m;
  MultiplierFamily out;
  out.m = m;
  out.pi = AffineMatrix::Zero(2 * m, 2 * m);
  for (std::size_t k = 0; k < families.size(); ++k) {
    const MultiplierFamily& fam = families[k];
    if (fam.m != m) throw std::invalid_argument("FamilySum: families disagree on m");
    const int offset = out.variables.Append(fam.variables, "f" + std::to_string(k) + ".");
    for (const auto& lin : fam.linear) out.linear.push_back(lin.Shifted(offset));
    for (const auto& lmi : fam.lmis) out.lmis.push_back(lmi.Shifted(offset));
    out.pi += fam.pi.Shifted(offset);
    out.name += (k == 0 ? "" : "+") + fam.name;
  }
  return out;
}

double PointwiseIqcValue(const MatrixXd& pi, const VectorXd& xi) {
  const auto m = xi.size();
  if (pi.rows() != 2 * m || pi.cols() != 2 * m) {
    throw std::invalid_argument("PointwiseIqcValue: Pi must be 2m x 2m");
  }
  VectorXd v(2 * m);
  v << xi, xi.cwiseMax(0.0);
  return v.dot(pi * v);
}

}  // namespace reluiqc
