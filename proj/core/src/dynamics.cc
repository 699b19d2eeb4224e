#include "reluiqc/dynamics.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "reluiqc/conic.h"

namespace reluiqc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double SpectralRadius(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> eig(a, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

RnnModel::RnnModel(MatrixXd lambda, MatrixXd win, MatrixXd wout)
    : lambda_(std::move(lambda)), win_(std::move(win)), wout_(std::move(wout)) {
  const auto n = lambda_.rows();
  if (lambda_.cols() != n) throw std::invalid_argument("RnnModel: Lambda must be square");
  if (n == 0 || win_.cols() == 0) throw std::invalid_argument("RnnModel: empty dimensions");
  if (win_.rows() != n) throw std::invalid_argument("RnnModel: Win must have n rows");
  if (wout_.rows() != win_.cols() || wout_.cols() != n) {
    throw std::invalid_argument("RnnModel: Wout must be m x n");
  }
  if (!lambda_.allFinite() || !win_.allFinite() || !wout_.allFinite()) {
    throw std::invalid_argument("RnnModel: non-finite entries");
  }
  const double rho = SpectralRadius(lambda_);
  if (rho >= 1.0 - kSchurTolerance) {
    throw std::invalid_argument("RnnModel: Lambda is not Schur stable (spectral radius " +
                                std::to_string(rho) + ")");
  }
}

RnnModel RnnModel::Example(double a, double b) {
  MatrixXd win(6, 6);
  // clang-format off
  win <<  0.29, -0.04,  0.02 + a, -0.35, -0.05, -0.12,
         -0.29, -0.24, -0.01,      0.12, -0.13,  0.18,
         -0.50,  b,     0.23,      0.40, -0.28, -0.08,
          0.14, -0.27, -0.15,      0.13, -0.47, -0.28,
         -0.10, -0.10,  0.08,      0.14, -0.22,  0.50,
         -0.11, -0.28, -0.21,     -0.14, -0.09,  0.20;
  // clang-format on
  return RnnModel(MatrixXd::Zero(6, 6), std::move(win), MatrixXd::Identity(6, 6));
}

double RnnModel::DataScale() const {
  return std::max({lambda_.cwiseAbs().maxCoeff(), win_.cwiseAbs().maxCoeff(),
                   wout_.cwiseAbs().maxCoeff()});
}

Signal Signal::Impulse(const VectorXd& value, int length) {
  Signal out(static_cast<int>(value.size()), length);
  if (length > 0) out[0] = value;
  return out;
}

void Signal::Append(const VectorXd& sample) {
  if (sample.size() != dim_) throw std::invalid_argument("Signal::Append: dimension mismatch");
  samples_.push_back(sample);
}

VectorXd Relu(const VectorXd& xi) { return xi.cwiseMax(0.0); }

bool ReluTripleSatisfied(const VectorXd& xi, const VectorXd& zeta, double tol) {
  if (xi.size() != zeta.size()) throw std::invalid_argument("ReluTripleSatisfied: dimension mismatch");
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    if (std::abs(zeta(i) * (zeta(i) - xi(i))) > tol) return false;
    if (zeta(i) < -tol || zeta(i) - xi(i) < -tol) return false;
  }
  return true;
}

Trajectory Simulate(const RnnModel& model, const Signal& s, const Signal& v, int horizon) {
  if (horizon < 0) throw std::invalid_argument("Simulate: negative horizon");
  if (s.dim() != model.m() || v.dim() != model.n()) {
    throw std::invalid_argument("Simulate: input dimension mismatch");
  }
  if (s.length() < horizon + 1 || v.length() < horizon + 1) {
    throw std::invalid_argument("Simulate: inputs shorter than horizon + 1");
  }
  Trajectory traj{Signal(model.n()), Signal(model.m()), Signal(model.m())};
  VectorXd x = VectorXd::Zero(model.n());
  for (int k = 0; k <= horizon; ++k) {
    const VectorXd z = model.wout() * x;
    const VectorXd w = Relu(z + s[k]);
    traj.x.Append(x);
    traj.z.Append(z);
    traj.w.Append(w);
    x = model.lambda() * x + model.win() * w + v[k];
  }
  return traj;
}

double L2Norm(const Signal& w) {
  double sum = 0.0;
  for (int k = 0; k < w.length(); ++k) sum += w[k].squaredNorm();
  return std::sqrt(sum);
}

double FrequencyGridPeak(const RnnModel& model, int points) {
  using Complex = std::complex<double>;
  const int n = model.n();
  const Eigen::MatrixXcd lambda = model.lambda().cast<Complex>();
  const Eigen::MatrixXcd win = model.win().cast<Complex>();
  const Eigen::MatrixXcd wout = model.wout().cast<Complex>();
  double peak = 0.0;
  for (int i = 0; i < points; ++i) {
    const double theta = points > 1 ? std::numbers::pi * i / (points - 1) : 0.0;
    const Complex zf = std::polar(1.0, theta);
    const Eigen::MatrixXcd resolvent = zf * Eigen::MatrixXcd::Identity(n, n) - lambda;
    const Eigen::MatrixXcd g = wout * resolvent.partialPivLu().solve(win);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
    peak = std::max(peak, svd.singularValues()(0));
  }
  return peak;
}

namespace {

// Margin of the bounded-real inequality at level gamma:
//   maximize t  s.t.  [[L'PL - P + C'C, L'PB], [B'PL, B'PB - g^2 I]] <= -t I,
//                     P >= 0, t <= 1.
// Returns the independently re-evaluated margin of the solver's point.
double BoundedRealMargin(const RnnModel& model, double gamma) {
  const int n = model.n(), m = model.m();
  const MatrixXd& lam = model.lambda();
  const MatrixXd& b = model.win();
  const MatrixXd& c = model.wout();

  conic::Program prog;
  const int num_p = n * (n + 1) / 2;
  prog.num_vars = num_p + 1;
  prog.objective = VectorXd::Zero(prog.num_vars);
  prog.objective(num_p) = 1.0;

  MatrixXd base = MatrixXd::Zero(n + m, n + m);
  base.topLeftCorner(n, n) = c.transpose() * c;
  base.bottomRightCorner(m, m) = -gamma * gamma * MatrixXd::Identity(m, m);
  MatrixXd ab(n, n + m);
  ab << lam, b;

  conic::LmiConstraint brl{-base, {}};
  conic::LmiConstraint psd{MatrixXd::Zero(n, n), {}};
  int var = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j, ++var) {
      MatrixXd e = MatrixXd::Zero(n, n);
      e(i, j) = e(j, i) = 1.0;
      MatrixXd coeff = ab.transpose() * e * ab;
      coeff.topLeftCorner(n, n) -= e;
      brl.terms.emplace_back(var, -coeff);
      psd.terms.emplace_back(var, e);
    }
  }
  brl.terms.emplace_back(num_p, -MatrixXd::Identity(n + m, n + m));
  prog.lmis = {brl, psd};
  prog.linear.push_back({1.0, {{num_p, -1.0}}});

  const conic::Solution sol = conic::Solve(prog);
  if (sol.y.size() != prog.num_vars || !sol.y.allFinite()) return -1.0;

  VectorXd y = sol.y;
  MatrixXd p = MatrixXd::Zero(n, n);
  var = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) p(i, j) = p(j, i) = y(var++);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> peig(p, Eigen::EigenvaluesOnly);
  if (peig.eigenvalues()(0) < -1e-12) return -1.0;
  MatrixXd lhs = ab.transpose() * p * ab + base;
  lhs.topLeftCorner(n, n) -= p;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (lhs + lhs.transpose()), Eigen::EigenvaluesOnly);
  return -eig.eigenvalues()(n + m - 1);
}

}  // namespace

double HinfNorm(const RnnModel& model, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("HinfNorm: tol must be positive");
  if (model.win().isZero(0.0) || model.wout().isZero(0.0)) return 0.0;

  double lo = FrequencyGridPeak(model, 1024);
  double hi = std::max(lo * 1.01, lo + tol);
  int expansions = 0;
  while (BoundedRealMargin(model, hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 60) throw std::runtime_error("HinfNorm: could not bracket the norm");
  }
  for (int iter = 0; hi - lo > tol; ++iter) {
    if (iter > 200) throw std::runtime_error("HinfNorm: bisection did not converge");
    const double mid = 0.5 * (lo + hi);
    if (BoundedRealMargin(model, mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double EmpiricalGainLowerBound(const RnnModel& model, int trials, int horizon, std::uint64_t seed) {
  if (trials <= 0 || horizon <= 0) {
    throw std::invalid_argument("EmpiricalGainLowerBound: trials and horizon must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double best = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const bool nonnegative = trial % 2 == 1;
    Signal s(model.m(), horizon + 1), v(model.n(), horizon + 1);
    double input_norm = 0.0;
    while (input_norm == 0.0) {
      for (int k = 0; k <= horizon; ++k) {
        for (int i = 0; i < model.m(); ++i) s[k](i) = normal(rng);
        for (int i = 0; i < model.n(); ++i) v[k](i) = normal(rng);
        if (nonnegative) {
          s[k] = s[k].cwiseAbs();
          v[k] = v[k].cwiseAbs();
        }
      }
      input_norm = std::hypot(L2Norm(s), L2Norm(v));
    }
    const Trajectory traj = Simulate(model, s, v, horizon);
    const double output_norm = std::hypot(L2Norm(traj.z), L2Norm(traj.w));
    best = std::max(best, output_norm / input_norm);
  }
  return best;
}

}  // namespace reluiqc
