#pragma once

#include "ntklab/trainer.hpp"

#include <cmath>
#include <vector>

namespace ntklab {

struct DriftPoint {
  double eta_scale = 1.0;
  // max_nu |R_nu(T) - R_nu(0)| with R built from the base rates, so every
  // level measures the same function of theta.
  double drift_max = 0.0;
  // Same, with R built from this level's scaled rates (= eta_scale * drift_max).
  double drift_max_scaled_rates = 0.0;
  RunStatus status = RunStatus::MaxSteps;
  std::int64_t T = 0;
  bool flagged = false;  // run aborted by the safety valve; excluded from ratios
};

/// Trains at rates (eta_w, eta_z) * 2^-k for k = 0..halvings, with the step
/// budget scaled by 2^k, and records the final invariant drift of each run.
/// Any multiple of R is conserved by the flow; drift_max fixes the multiple to
/// the base rates so that levels are comparable at equal physical time.
inline std::vector<DriftPoint> drift_study(const DataSet& data, const Theta& theta0,
                                           const TrainConfig& config, int halvings) {
  require(config.eta_w > 0.0 && config.eta_z > 0.0,
          "drift_study: both rates must be positive");
  require(halvings >= 0, "drift_study: halvings must be nonnegative");
  std::vector<DriftPoint> out;
  for (int k = 0; k <= halvings; ++k) {
    TrainConfig c = config;
    const double scale = std::ldexp(1.0, -k);
    c.eta_w = config.eta_w * scale;
    c.eta_z = config.eta_z * scale;
    c.max_steps = config.max_steps << k;
    c.track_flips = false;
    const RunReport r = train(data, theta0, c);
    const double drift =
        drift_between(compute_R(theta0, config.eta_w, config.eta_z),
                      compute_R(r.final_theta, config.eta_w, config.eta_z))
            .first;
    out.push_back({scale, drift, r.invariant_drift, r.status, r.T,
                   r.status == RunStatus::SafetyValve});
  }
  return out;
}

/// drift(k) / drift(k + 1) for consecutive unflagged levels.
inline std::vector<double> drift_ratios(const std::vector<DriftPoint>& points) {
  std::vector<double> ratios;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    if (points[k].flagged || points[k + 1].flagged) continue;
    ratios.push_back(points[k].drift_max / points[k + 1].drift_max);
  }
  return ratios;
}

}  // namespace ntklab
