#pragma once

// Per-neuron layer-balance quantity R_nu = eta_w z_nu^2 - eta_z ||W_nu||^2.
// It is conserved by the gradient flow; the discrete iteration drifts by a
// second-order amount per step.

#include "ntklab/network.hpp"

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

namespace ntklab {

inline Vector compute_R(const Theta& theta, double eta_w, double eta_z) {
  return eta_w * theta.z.array().square().matrix() -
         eta_z * theta.W.rowwise().squaredNorm();
}

struct InvariantCheckpoint {
  std::int64_t step = 0;
  Vector R;
};

struct InvariantTrace {
  std::vector<InvariantCheckpoint> checkpoints;
  double drift_max = 0.0;
  double drift_mean = 0.0;
};

/// max_nu |R_nu - R0_nu| and its mean over neurons.
inline std::pair<double, double> drift_between(const Vector& r0, const Vector& r) {
  if (r0.size() == 0) return {0.0, 0.0};
  const Vector d = (r - r0).cwiseAbs();
  return {d.maxCoeff(), d.mean()};
}

inline void finalize(InvariantTrace& trace) {
  if (trace.checkpoints.empty()) return;
  const auto [mx, mean] = drift_between(trace.checkpoints.front().R, trace.checkpoints.back().R);
  trace.drift_max = mx;
  trace.drift_mean = mean;
}

/// CSV rows (step, min_R, max_R, drift_so_far).
inline void write_invariant_csv(const InvariantTrace& trace, std::ostream& out) {
  out << "step,min_R,max_R,drift_so_far\n";
  if (trace.checkpoints.empty()) return;
  const Vector& r0 = trace.checkpoints.front().R;
  const auto old_precision = out.precision(17);
  for (const auto& cp : trace.checkpoints) {
    const double lo = cp.R.size() ? cp.R.minCoeff() : 0.0;
    const double hi = cp.R.size() ? cp.R.maxCoeff() : 0.0;
    out << cp.step << ',' << lo << ',' << hi << ',' << drift_between(r0, cp.R).first << '\n';
  }
  out.precision(old_precision);
}

}  // namespace ntklab
