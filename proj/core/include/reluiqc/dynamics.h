#pragma once

/// @file
/// Discrete-time ReLU recurrent network
///
///   x(k+1) = Lambda x(k) + Win w(k) + v(k)
///   z(k)   = Wout x(k)
///   w(k)   = relu(z(k) + s(k)),          x(0) = 0,
///
/// together with signal norms and the l2-induced norm of the linear part
/// G0 = (Lambda, Win, Wout, 0).

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace reluiqc {

/// Spectral radius below 1 - kSchurTolerance counts as Schur stable.
inline constexpr double kSchurTolerance = 1e-10;

double SpectralRadius(const Eigen::MatrixXd& a);

class RnnModel {
 public:
  /// Throws std::invalid_argument on inconsistent shapes or when Lambda is
  /// not Schur stable.
  RnnModel(Eigen::MatrixXd lambda, Eigen::MatrixXd win, Eigen::MatrixXd wout);

  /// Six-neuron example network with Lambda = 0, Wout = I and the two
  /// tunable entries Win(0,2) = 0.02 + a, Win(2,1) = b.
  static RnnModel Example(double a, double b);

  const Eigen::MatrixXd& lambda() const { return lambda_; }
  const Eigen::MatrixXd& win() const { return win_; }
  const Eigen::MatrixXd& wout() const { return wout_; }
  int n() const { return static_cast<int>(lambda_.rows()); }
  int m() const { return static_cast<int>(win_.cols()); }

  /// Largest absolute entry over all three matrices.
  double DataScale() const;

 private:
  Eigen::MatrixXd lambda_;
  Eigen::MatrixXd win_;
  Eigen::MatrixXd wout_;
};

/// Finite sequence of equally sized vectors indexed from k = 0.
class Signal {
 public:
  Signal() = default;
  explicit Signal(int dim) : dim_(dim) {}
  Signal(int dim, int length) : dim_(dim), samples_(static_cast<std::size_t>(length), Eigen::VectorXd::Zero(dim)) {}

  /// Impulse of the given vector at k = 0 followed by zeros.
  static Signal Impulse(const Eigen::VectorXd& value, int length);

  int dim() const { return dim_; }
  int length() const { return static_cast<int>(samples_.size()); }
  const Eigen::VectorXd& operator[](int k) const { return samples_[static_cast<std::size_t>(k)]; }
  Eigen::VectorXd& operator[](int k) { return samples_[static_cast<std::size_t>(k)]; }
  void Append(const Eigen::VectorXd& sample);

 private:
  int dim_ = 0;
  std::vector<Eigen::VectorXd> samples_;
};

struct Trajectory {
  Signal x;
  Signal z;
  Signal w;
};

Eigen::VectorXd Relu(const Eigen::VectorXd& xi);

/// zeta == relu(xi) up to tol, via zeta.*(zeta - xi) = 0, zeta >= 0,
/// zeta - xi >= 0.
bool ReluTripleSatisfied(const Eigen::VectorXd& xi, const Eigen::VectorXd& zeta, double tol);

/// Simulates steps k = 0..horizon (horizon + 1 samples) from x(0) = 0.
/// s and v need at least horizon + 1 samples.
Trajectory Simulate(const RnnModel& model, const Signal& s, const Signal& v, int horizon);

double L2Norm(const Signal& w);

/// Peak of the largest singular value of G0(e^{j theta}) over `points`
/// frequencies in [0, pi]; a lower bound on the l2-induced norm.
double FrequencyGridPeak(const RnnModel& model, int points);

/// l2-induced norm of G0 to absolute accuracy tol, by bisection on the
/// discrete-time bounded-real LMI. Throws std::runtime_error if the
/// bisection cannot establish a bracket.
double HinfNorm(const RnnModel& model, double tol = 1e-6);

/// max over trials of ||[z; w]|| / ||[s; v]|| for random inputs over the
/// given horizon. Even trials draw i.i.d. standard normal inputs, odd trials
/// their absolute values. Deterministic in seed.
double EmpiricalGainLowerBound(const RnnModel& model, int trials, int horizon, std::uint64_t seed);

}  // namespace reluiqc
