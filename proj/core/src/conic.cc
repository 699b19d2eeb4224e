#include "reluiqc/conic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace reluiqc::conic {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(Status status) {
  switch (status) {
    case Status::kOptimal:
      return "optimal";
    case Status::kMaxIterations:
      return "max_iterations";
    case Status::kNumericalFailure:
      return "numerical_failure";
    case Status::kDiverged:
      return "diverged";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Internally the LMI form is the dual of
//   min <C, X>  s.t.  <A_i, X> = b_i,  X >= 0
// with C = F0 and A_i = -F_i, so that Z = C - sum_i y_i A_i = F(y).
struct Block {
  int dim = 0;
  MatrixXd c;
  std::vector<int> vars;
  std::vector<MatrixXd> a;
};

struct LpRow {
  double c = 0.0;
  std::vector<std::pair<int, double>> a;
};

double Inner(const MatrixXd& lhs, const MatrixXd& rhs) {
  return (lhs.array() * rhs.array()).sum();
}

MatrixXd Sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Largest alpha with x + alpha * dx PSD, assuming x is positive definite.
double MaxStep(const MatrixXd& x, const MatrixXd& dx) {
  Eigen::LLT<MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  MatrixXd w = llt.matrixL().solve(dx);
  w = llt.matrixL().solve(w.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Sym(w), Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0);
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

struct State {
  VectorXd y;
  std::vector<MatrixXd> x, z;
  VectorXd xl, zl;
};

struct Direction {
  VectorXd dy;
  std::vector<MatrixXd> dx, dz;
  VectorXd dxl, dzl;
};

class InteriorPoint {
 public:
  InteriorPoint(const Program& program, const Options& options)
      : options_(options), p_(program.num_vars) {
    if (program.objective.size() != p_) {
      throw std::invalid_argument("conic: objective size != num_vars");
    }
    b_ = program.objective;
    for (const auto& lmi : program.lmis) {
      Block blk;
      blk.dim = static_cast<int>(lmi.constant.rows());
      if (lmi.constant.cols() != blk.dim) {
        throw std::invalid_argument("conic: non-square LMI constant");
      }
      blk.c = Sym(lmi.constant);
      // Merge duplicate variable entries and drop zero coefficients.
      std::vector<std::pair<int, MatrixXd>> terms = lmi.terms;
      std::sort(terms.begin(), terms.end(),
                [](const auto& l, const auto& r) { return l.first < r.first; });
      for (const auto& [var, coeff] : terms) {
        if (var < 0 || var >= p_) throw std::invalid_argument("conic: bad var");
        if (coeff.rows() != blk.dim || coeff.cols() != blk.dim) {
          throw std::invalid_argument("conic: LMI coefficient size mismatch");
        }
        if (!blk.vars.empty() && blk.vars.back() == var) {
          blk.a.back() -= Sym(coeff);
        } else {
          blk.vars.push_back(var);
          blk.a.push_back(-Sym(coeff));
        }
      }
      for (std::size_t k = blk.vars.size(); k-- > 0;) {
        if (blk.a[k].cwiseAbs().maxCoeff() == 0.0) {
          blk.vars.erase(blk.vars.begin() + static_cast<long>(k));
          blk.a.erase(blk.a.begin() + static_cast<long>(k));
        }
      }
      if (blk.dim > 0) blocks_.push_back(std::move(blk));
    }
    for (const auto& lin : program.linear) {
      LpRow row;
      row.c = lin.constant;
      for (const auto& [var, coeff] : lin.terms) {
        if (var < 0 || var >= p_) throw std::invalid_argument("conic: bad var");
        if (coeff != 0.0) row.a.emplace_back(var, -coeff);
      }
      rows_.push_back(std::move(row));
    }
    total_dim_ = static_cast<int>(rows_.size());
    for (const auto& blk : blocks_) total_dim_ += blk.dim;
  }

  Solution Run() {
    Solution sol;
    sol.y = VectorXd::Zero(p_);
    if (total_dim_ == 0) {
      sol.status = b_.isZero() ? Status::kOptimal : Status::kDiverged;
      sol.detail = "no constraints";
      return sol;
    }
    State s = InitialPoint();
    const double norm_b = b_.norm();
    double norm_c = 0.0;
    for (const auto& blk : blocks_) norm_c += blk.c.squaredNorm();
    for (const auto& row : rows_) norm_c += row.c * row.c;
    norm_c = std::sqrt(norm_c);

    for (int iter = 0; iter <= options_.max_iterations; ++iter) {
      sol.iterations = iter;
      // Residuals.
      VectorXd rp = b_;
      std::vector<MatrixXd> rd(blocks_.size());
      for (std::size_t k = 0; k < blocks_.size(); ++k) {
        const Block& blk = blocks_[k];
        rd[k] = blk.c - s.z[k];
        for (std::size_t v = 0; v < blk.vars.size(); ++v) {
          rp(blk.vars[v]) -= Inner(blk.a[v], s.x[k]);
          rd[k] -= s.y(blk.vars[v]) * blk.a[v];
        }
      }
      VectorXd rdl(rows_.size());
      for (std::size_t l = 0; l < rows_.size(); ++l) {
        double r = rows_[l].c - s.zl(static_cast<long>(l));
        for (const auto& [var, a] : rows_[l].a) {
          rp(var) -= a * s.xl(static_cast<long>(l));
          r -= a * s.y(var);
        }
        rdl(static_cast<long>(l)) = r;
      }
      double pobj = 0.0, comp = 0.0, rd_norm = rdl.squaredNorm();
      for (std::size_t k = 0; k < blocks_.size(); ++k) {
        pobj += Inner(blocks_[k].c, s.x[k]);
        comp += Inner(s.x[k], s.z[k]);
        rd_norm += rd[k].squaredNorm();
      }
      for (std::size_t l = 0; l < rows_.size(); ++l) {
        pobj += rows_[l].c * s.xl(static_cast<long>(l));
      }
      comp += s.xl.dot(s.zl);
      const double dobj = b_.dot(s.y);
      const double mu = comp / total_dim_;

      sol.y = s.y;
      sol.objective = dobj;
      sol.upper_bound = pobj;
      sol.multiplier_residual = rp.norm() / (1.0 + norm_b);
      sol.slack_residual = std::sqrt(rd_norm) / (1.0 + norm_c);
      sol.relative_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

      if (sol.multiplier_residual < options_.tolerance &&
          sol.slack_residual < options_.tolerance &&
          sol.relative_gap < options_.tolerance) {
        sol.status = Status::kOptimal;
        return sol;
      }
      if (iter == options_.max_iterations) break;
      if (!s.y.allFinite() || s.y.cwiseAbs().maxCoeff() > options_.divergence_bound ||
          MaxNorm(s.x, s.xl) > options_.divergence_bound) {
        sol.status = Status::kDiverged;
        sol.detail = "iterates exceeded divergence bound";
        return sol;
      }

      // Factorization shared by predictor and corrector.
      std::vector<MatrixXd> zinv(blocks_.size());
      for (std::size_t k = 0; k < blocks_.size(); ++k) {
        Eigen::LLT<MatrixXd> llt(s.z[k]);
        if (llt.info() != Eigen::Success) {
          sol.status = Status::kNumericalFailure;
          sol.detail = "slack block lost definiteness";
          return sol;
        }
        zinv[k] = llt.solve(MatrixXd::Identity(blocks_[k].dim, blocks_[k].dim));
      }
      MatrixXd& schur = schur_matrix_;
      schur = SchurComplement(s, zinv);
      Eigen::LLT<MatrixXd> schur_llt(schur);
      if (schur_llt.info() != Eigen::Success) {
        const double reg = 1e-14 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
        schur.diagonal().array() += reg;
        schur_llt.compute(schur);
        if (schur_llt.info() != Eigen::Success) {
          sol.status = Status::kNumericalFailure;
          sol.detail = "Schur complement is singular";
          return sol;
        }
      }

      // Predictor.
      std::vector<MatrixXd> rc(blocks_.size());
      for (std::size_t k = 0; k < blocks_.size(); ++k) rc[k] = -s.x[k] * s.z[k];
      VectorXd rcl = -s.xl.cwiseProduct(s.zl);
      Direction aff = ComputeDirection(s, zinv, schur_llt, rp, rd, rdl, rc, rcl);
      const double ap_aff = std::min(1.0, PrimalStep(s, aff));
      const double ad_aff = std::min(1.0, DualStep(s, aff));
      double comp_aff = 0.0;
      for (std::size_t k = 0; k < blocks_.size(); ++k) {
        comp_aff += Inner(s.x[k] + ap_aff * aff.dx[k], s.z[k] + ad_aff * aff.dz[k]);
      }
      comp_aff += (s.xl + ap_aff * aff.dxl).dot(s.zl + ad_aff * aff.dzl);
      const double mu_aff = comp_aff / total_dim_;
      const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

      // Corrector.
      for (std::size_t k = 0; k < blocks_.size(); ++k) {
        const int d = blocks_[k].dim;
        rc[k] = sigma * mu * MatrixXd::Identity(d, d) - s.x[k] * s.z[k] -
                aff.dx[k] * aff.dz[k];
      }
      rcl = VectorXd::Constant(static_cast<long>(rows_.size()), sigma * mu) -
            s.xl.cwiseProduct(s.zl) - aff.dxl.cwiseProduct(aff.dzl);
      Direction dir = ComputeDirection(s, zinv, schur_llt, rp, rd, rdl, rc, rcl);
      const double gamma = mu < 1e-6 ? 0.98 : 0.95;
      const double ap = std::min(1.0, gamma * PrimalStep(s, dir));
      const double ad = std::min(1.0, gamma * DualStep(s, dir));
      if (options_.verbose) {
        std::fprintf(stderr, "%3d pobj %+.9e dobj %+.9e pinf %.2e dinf %.2e gap %.2e mu %.2e ap %.3f ad %.3f\n",
                     iter, pobj, dobj, sol.multiplier_residual, sol.slack_residual, sol.relative_gap, mu, ap,
                     ad);
      }
      if (ap < 1e-12 && ad < 1e-12) {
        sol.status = Status::kNumericalFailure;
        sol.detail = "step length collapsed";
        return sol;
      }
      if (!TakeStep(&s, dir, ap, ad)) {
        sol.status = Status::kNumericalFailure;
        sol.detail = "could not keep iterates positive definite";
        return sol;
      }
    }
    sol.status = Status::kMaxIterations;
    sol.detail = "iteration limit reached";
    return sol;
  }

 private:
  static double MaxNorm(const std::vector<MatrixXd>& mats, const VectorXd& vec) {
    double out = vec.size() > 0 ? vec.cwiseAbs().maxCoeff() : 0.0;
    for (const auto& m : mats) out = std::max(out, m.cwiseAbs().maxCoeff());
    return out;
  }

  // Applies the step, shrinking it while rounding pushes a block out of
  // the cone.
  bool TakeStep(State* s, const Direction& d, double ap, double ad) const {
    for (int attempt = 0; attempt < 30; ++attempt) {
      State next = *s;
      next.y += ad * d.dy;
      bool ok = true;
      for (std::size_t k = 0; k < blocks_.size() && ok; ++k) {
        next.x[k] = Sym(s->x[k] + ap * d.dx[k]);
        next.z[k] = Sym(s->z[k] + ad * d.dz[k]);
        ok = Eigen::LLT<MatrixXd>(next.x[k]).info() == Eigen::Success &&
             Eigen::LLT<MatrixXd>(next.z[k]).info() == Eigen::Success;
      }
      next.xl += ap * d.dxl;
      next.zl += ad * d.dzl;
      ok = ok && (next.xl.size() == 0 || (next.xl.minCoeff() > 0.0 && next.zl.minCoeff() > 0.0));
      if (ok) {
        *s = std::move(next);
        return true;
      }
      ap *= 0.7;
      ad *= 0.7;
    }
    return false;
  }

  State InitialPoint() const {
    double max_ratio = 0.0, max_a = 0.0;
    std::vector<double> a_norm(static_cast<std::size_t>(p_), 0.0);
    for (const auto& blk : blocks_) {
      for (std::size_t v = 0; v < blk.vars.size(); ++v) {
        a_norm[static_cast<std::size_t>(blk.vars[v])] += blk.a[v].squaredNorm();
      }
    }
    for (const auto& row : rows_) {
      for (const auto& [var, a] : row.a) a_norm[static_cast<std::size_t>(var)] += a * a;
    }
    for (int i = 0; i < p_; ++i) {
      const double an = std::sqrt(a_norm[static_cast<std::size_t>(i)]);
      max_ratio = std::max(max_ratio, (1.0 + std::abs(b_(i))) / (1.0 + an));
      max_a = std::max(max_a, an);
    }
    double c_norm = 0.0;
    for (const auto& blk : blocks_) c_norm = std::max(c_norm, blk.c.norm());
    for (const auto& row : rows_) c_norm = std::max(c_norm, std::abs(row.c));
    const double n = total_dim_;
    const double alpha = 10.0 * n * std::max(max_ratio, 1e-3);
    const double beta = 10.0 * (1.0 + std::max(max_a, c_norm)) / std::sqrt(n);

    State s;
    s.y = VectorXd::Zero(p_);
    for (const auto& blk : blocks_) {
      s.x.push_back(alpha * MatrixXd::Identity(blk.dim, blk.dim));
      s.z.push_back(beta * MatrixXd::Identity(blk.dim, blk.dim));
    }
    s.xl = VectorXd::Constant(static_cast<long>(rows_.size()), alpha);
    s.zl = VectorXd::Constant(static_cast<long>(rows_.size()), beta);
    return s;
  }

  MatrixXd SchurComplement(const State& s, const std::vector<MatrixXd>& zinv) const {
    MatrixXd m = MatrixXd::Zero(p_, p_);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const Block& blk = blocks_[k];
      const std::size_t nv = blk.vars.size();
      for (std::size_t u = 0; u < nv; ++u) {
        const MatrixXd g = s.x[k] * blk.a[u] * zinv[k];
        const int i = blk.vars[u];
        for (std::size_t v = u; v < nv; ++v) {
          m(i, blk.vars[v]) += Inner(g, blk.a[v]);
        }
      }
    }
    for (std::size_t l = 0; l < rows_.size(); ++l) {
      const double w = s.xl(static_cast<long>(l)) / s.zl(static_cast<long>(l));
      const auto& a = rows_[l].a;
      for (std::size_t u = 0; u < a.size(); ++u) {
        for (std::size_t v = 0; v < a.size(); ++v) {
          if (a[u].first <= a[v].first) m(a[u].first, a[v].first) += w * a[u].second * a[v].second;
        }
      }
    }
    m.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();
    return m;
  }

  Direction ComputeDirection(const State& s, const std::vector<MatrixXd>& zinv,
                             const Eigen::LLT<MatrixXd>& schur, const VectorXd& rp,
                             const std::vector<MatrixXd>& rd, const VectorXd& rdl,
                             const std::vector<MatrixXd>& rc, const VectorXd& rcl) const {
    VectorXd rhs = rp;
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const Block& blk = blocks_[k];
      const MatrixXd t = (rc[k] - s.x[k] * rd[k]) * zinv[k];
      for (std::size_t v = 0; v < blk.vars.size(); ++v) {
        rhs(blk.vars[v]) -= Inner(blk.a[v], t);
      }
    }
    for (std::size_t l = 0; l < rows_.size(); ++l) {
      const auto li = static_cast<long>(l);
      const double t = (rcl(li) - s.xl(li) * rdl(li)) / s.zl(li);
      for (const auto& [var, a] : rows_[l].a) rhs(var) -= a * t;
    }
    Direction d;
    d.dy = schur.solve(rhs);
    // One step of iterative refinement against the unfactored system.
    d.dy += schur.solve(rhs - schur_matrix_ * d.dy);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const Block& blk = blocks_[k];
      MatrixXd dz = rd[k];
      for (std::size_t v = 0; v < blk.vars.size(); ++v) dz -= d.dy(blk.vars[v]) * blk.a[v];
      d.dx.push_back(Sym((rc[k] - s.x[k] * dz) * zinv[k]));
      d.dz.push_back(Sym(dz));
    }
    d.dzl = rdl;
    for (std::size_t l = 0; l < rows_.size(); ++l) {
      for (const auto& [var, a] : rows_[l].a) d.dzl(static_cast<long>(l)) -= a * d.dy(var);
    }
    d.dxl = (rcl - s.xl.cwiseProduct(d.dzl)).cwiseQuotient(s.zl);
    return d;
  }

  double PrimalStep(const State& s, const Direction& d) const {
    double step = kInf;
    for (std::size_t k = 0; k < blocks_.size(); ++k) step = std::min(step, MaxStep(s.x[k], d.dx[k]));
    for (long l = 0; l < s.xl.size(); ++l) {
      if (d.dxl(l) < 0.0) step = std::min(step, -s.xl(l) / d.dxl(l));
    }
    return step;
  }

  double DualStep(const State& s, const Direction& d) const {
    double step = kInf;
    for (std::size_t k = 0; k < blocks_.size(); ++k) step = std::min(step, MaxStep(s.z[k], d.dz[k]));
    for (long l = 0; l < s.zl.size(); ++l) {
      if (d.dzl(l) < 0.0) step = std::min(step, -s.zl(l) / d.dzl(l));
    }
    return step;
  }

  Options options_;
  int p_;
  MatrixXd schur_matrix_;
  VectorXd b_;
  std::vector<Block> blocks_;
  std::vector<LpRow> rows_;
  int total_dim_ = 0;
};

}  // namespace

Solution Solve(const Program& program, const Options& options) {
  return InteriorPoint(program, options).Run();
}

double MinConstraintValue(const Program& program, const VectorXd& y) {
  double out = kInf;
  for (const auto& lmi : program.lmis) {
    if (lmi.constant.rows() == 0) continue;
    MatrixXd f = lmi.constant;
    for (const auto& [var, coeff] : lmi.terms) f += y(var) * coeff;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Sym(f), Eigen::EigenvaluesOnly);
    out = std::min(out, eig.eigenvalues()(0));
  }
  for (const auto& lin : program.linear) {
    double v = lin.constant;
    for (const auto& [var, coeff] : lin.terms) v += y(var) * coeff;
    out = std::min(out, v);
  }
  return out;
}

}  // namespace reluiqc::conic
