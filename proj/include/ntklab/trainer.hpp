#pragma once

// Two-rate gradient descent with the safety valve and success threshold,
// activation-flip tracking, and the end-of-run control quantities.

#include "ntklab/invariant.hpp"
#include "ntklab/network.hpp"
#include "ntklab/synth_data.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ntklab {

struct TrainConfig {
  double eta_w = 1e-3;
  double eta_z = 0.0;
  double eps_success = 1e-3;
  std::int64_t max_steps = 100000;
  std::int64_t history_stride = 10;
  bool track_flips = true;
  // Evaluate lambda_min(H_t) every this many steps (0 = only at 0 and T).
  std::int64_t lambda_stride = 0;
  // Keep per-neuron R checkpoints every history_stride steps.
  bool record_invariant = false;

  void validate() const {
    require(eta_w >= 0.0 && eta_z >= 0.0, "TrainConfig: rates must be nonnegative");
    require(eta_w + eta_z > 0.0, "TrainConfig: at least one rate must be positive");
    require(eps_success > 0.0, "TrainConfig: eps_success must be positive");
    require(max_steps >= 0, "TrainConfig: max_steps must be nonnegative");
    require(history_stride >= 1, "TrainConfig: history_stride must be >= 1");
    require(lambda_stride >= 0, "TrainConfig: lambda_stride must be >= 0");
  }
};

enum class RunStatus { Converged, SafetyValve, MaxSteps };

inline std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::SafetyValve: return "SafetyValve";
    case RunStatus::MaxSteps: return "MaxSteps";
  }
  return "unknown";
}

inline RunStatus parse_run_status(const std::string& s) {
  if (s == "Converged") return RunStatus::Converged;
  if (s == "SafetyValve") return RunStatus::SafetyValve;
  if (s == "MaxSteps") return RunStatus::MaxSteps;
  throw std::invalid_argument("unknown run status: " + s);
}

struct ErrorSample {
  std::int64_t step = 0;
  double norm = 0.0;
};

struct LambdaSample {
  std::int64_t step = 0;
  double lambda_min_H = 0.0;
};

struct RunReport {
  RunStatus status = RunStatus::MaxSteps;
  bool nonfinite = false;
  std::int64_t T = 0;
  double kappa_H = 0.0;
  double lambda_min_H0 = 0.0;
  double lambda_min_HT = 0.0;
  double lambda_min_G0 = 0.0;
  double lambda_min_GT = 0.0;
  std::int64_t D_count = 0;
  double kappa_D = 0.0;
  double w_displacement = 0.0;
  double kappa_W = 0.0;
  double z_displacement = 0.0;
  std::vector<ErrorSample> error_history;
  std::int64_t flip_per_column_max = 0;
  std::int64_t flip_per_row_max = 0;
  std::int64_t zero_hit_total = 0;
  double invariant_drift = 0.0;
  double activation_deviation = 0.0;
  std::vector<LambdaSample> lambda_history;
  InvariantTrace invariant;  // populated only with record_invariant
  Theta final_theta;         // not serialized
};

struct FlipStats {
  std::int64_t D_count = 0;
  std::int64_t per_column_max = 0;
  std::int64_t per_row_max = 0;
};

/// Records every (neuron, sample) pair whose activation has differed from the
/// initial pattern at some integer step.
class FlipTracker {
 public:
  FlipTracker() = default;

  explicit FlipTracker(const Matrix& A0)
      : active_(true),
        a0_(A0.array() > 0.5),
        ever_flipped_(Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
            A0.rows(), A0.cols(), false)),
        per_column_(Eigen::Array<std::int64_t, Eigen::Dynamic, 1>::Zero(A0.cols())),
        per_row_(Eigen::Array<std::int64_t, Eigen::Dynamic, 1>::Zero(A0.rows())) {}

  bool active() const { return active_; }

  void update(const Matrix& A) {
    require(active_, "FlipTracker: tracking disabled");
    require(A.rows() == a0_.rows() && A.cols() == a0_.cols(), "FlipTracker: shape mismatch");
    for (Index j = 0; j < A.cols(); ++j) {
      for (Index nu = 0; nu < A.rows(); ++nu) {
        if (ever_flipped_(nu, j)) continue;
        if ((A(nu, j) > 0.5) != a0_(nu, j)) {
          ever_flipped_(nu, j) = true;
          ++per_column_(j);
          ++per_row_(nu);
          ++total_;
        }
      }
    }
  }

  std::int64_t total() const { return total_; }
  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& ever_flipped() const {
    return ever_flipped_;
  }
  const Eigen::Array<std::int64_t, Eigen::Dynamic, 1>& per_column_counts() const {
    return per_column_;
  }
  const Eigen::Array<std::int64_t, Eigen::Dynamic, 1>& per_row_counts() const { return per_row_; }

 private:
  bool active_ = false;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> a0_;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> ever_flipped_;
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> per_column_;
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> per_row_;
  std::int64_t total_ = 0;
};

inline FlipStats flip_stats(const FlipTracker& tracker) {
  require(tracker.active(), "flip_stats: tracking disabled");
  FlipStats s;
  s.D_count = tracker.total();
  const auto& col = tracker.per_column_counts();
  const auto& row = tracker.per_row_counts();
  s.per_column_max = col.size() ? col.maxCoeff() : 0;
  s.per_row_max = row.size() ? row.maxCoeff() : 0;
  return s;
}

/// One gradient step from theta; cache must be forward(theta, X, y).
inline Theta step(const Theta& theta, const ForwardCache& cache, const Matrix& X,
                  const TrainConfig& config) {
  Theta next = theta;
  if (config.eta_w != 0.0) next.W -= config.eta_w * grad_w(cache, X);
  if (config.eta_z != 0.0) next.z -= config.eta_z * grad_z(cache);
  return next;
}

/// ||(A_t - A_0) * X||, evaluated as sqrt(lambda_max((D^T D) o (X^T X))) with
/// D = A_t - A_0, which is the Gram matrix of the Khatri-Rao product.
inline double activation_deviation(const Theta& theta_t, const Theta& theta_0, const Matrix& X) {
  const Matrix d = ((theta_t.W * X).array() > 0.0).cast<double>().matrix() -
                   ((theta_0.W * X).array() > 0.0).cast<double>().matrix();
  if (d.isZero(0.0)) return 0.0;
  const Matrix gram = (d.transpose() * d).cwiseProduct(X.transpose() * X);
  return std::sqrt(std::max(0.0, max_eigen_sym(gram)));
}

inline RunReport train(const DataSet& data, const Theta& theta0, const TrainConfig& config) {
  config.validate();
  const Matrix& X = data.X;
  const Index m = X.cols();
  const Index S = theta0.width();

  RunReport rep;
  Theta theta = theta0;
  ForwardCache cache = forward(theta, X, data.y);
  FlipTracker tracker = config.track_flips ? FlipTracker(cache.A) : FlipTracker();
  const Vector r0 = compute_R(theta0, config.eta_w, config.eta_z);

  auto lambda_h = [&](const ForwardCache& c) { return min_eigen_sym(ntk(c, X).H); };
  {
    const NtkPair p = ntk(cache, X);
    rep.lambda_min_H0 = min_eigen_sym(p.H);
    rep.lambda_min_G0 = min_eigen_sym(p.G);
  }
  if (config.lambda_stride > 0) rep.lambda_history.push_back({0, rep.lambda_min_H0});
  if (config.record_invariant) rep.invariant.checkpoints.push_back({0, r0});

  std::int64_t zero_hits = static_cast<std::int64_t>(cache.zero_hits);
  double prev = cache.e.norm();
  rep.error_history.push_back({0, prev});

  std::int64_t t = 0;
  bool done = false;
  if (!std::isfinite(prev)) {
    rep.status = RunStatus::SafetyValve;
    rep.nonfinite = true;
    done = true;
  } else if (prev < config.eps_success) {
    rep.status = RunStatus::Converged;
    done = true;
  }

  while (!done) {
    if (t >= config.max_steps) {
      rep.status = RunStatus::MaxSteps;
      break;
    }
    theta = step(theta, cache, X, config);
    cache = forward(theta, X, data.y);
    ++t;
    zero_hits += static_cast<std::int64_t>(cache.zero_hits);
    if (tracker.active()) tracker.update(cache.A);

    const double cur = cache.e.norm();
    if (!std::isfinite(cur)) {
      rep.status = RunStatus::SafetyValve;
      rep.nonfinite = true;
      done = true;
    } else if (cur < config.eps_success) {
      rep.status = RunStatus::Converged;
      done = true;
    } else if (cur > prev) {
      rep.status = RunStatus::SafetyValve;
      done = true;
    }
    if (done || t % config.history_stride == 0) rep.error_history.push_back({t, cur});
    if (config.lambda_stride > 0 && !done && t % config.lambda_stride == 0)
      rep.lambda_history.push_back({t, lambda_h(cache)});
    if (config.record_invariant && (done || t % config.history_stride == 0))
      rep.invariant.checkpoints.push_back({t, compute_R(theta, config.eta_w, config.eta_z)});
    prev = cur;
  }

  rep.T = t;
  if (!rep.nonfinite) {
    const NtkPair p = ntk(cache, X);
    rep.lambda_min_HT = min_eigen_sym(p.H);
    rep.lambda_min_GT = min_eigen_sym(p.G);
  } else {
    rep.lambda_min_HT = std::numeric_limits<double>::quiet_NaN();
    rep.lambda_min_GT = std::numeric_limits<double>::quiet_NaN();
  }
  if (config.lambda_stride > 0 && rep.lambda_history.back().step != t)
    rep.lambda_history.push_back({t, rep.lambda_min_HT});
  rep.kappa_H = rep.lambda_min_HT / rep.lambda_min_H0;

  if (tracker.active()) {
    const FlipStats fs = flip_stats(tracker);
    rep.D_count = fs.D_count;
    rep.flip_per_column_max = fs.per_column_max;
    rep.flip_per_row_max = fs.per_row_max;
    rep.activation_deviation = rep.nonfinite ? 0.0 : activation_deviation(theta, theta0, X);
  }
  rep.kappa_D = static_cast<double>(rep.D_count) / (static_cast<double>(m) * static_cast<double>(S));
  rep.w_displacement = (theta.W - theta0.W).norm();
  rep.kappa_W = rep.w_displacement / std::sqrt(static_cast<double>(m));
  rep.z_displacement = (theta.z - theta0.z).norm();
  rep.zero_hit_total = zero_hits;
  rep.invariant_drift =
      drift_between(r0, compute_R(theta, config.eta_w, config.eta_z)).first;
  finalize(rep.invariant);
  rep.final_theta = std::move(theta);
  return rep;
}

}  // namespace ntklab
