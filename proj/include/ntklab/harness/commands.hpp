#pragma once

// Library side of the CLI subcommands that produce documents rather than runs.

#include "ntklab/drift_study.hpp"
#include "ntklab/harness/emit.hpp"
#include "ntklab/harness/experiment.hpp"
#include "ntklab/ntk_limit.hpp"
#include "ntklab/quasirandom.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace ntklab {

/// Every quasirandom check on one sampled instance, as one JSON document.
inline json props_command(const ProblemDims& dims, std::uint64_t seed,
                          const PropertySuiteOptions& opt = {}) {
  json reports = json::array();
  for (const auto& r : run_property_suite(dims, seed, opt)) reports.push_back(to_json(r));
  return {{"n", dims.n},     {"S", dims.S},
          {"m", dims.m},     {"seed", seed},
          {"z_init", to_string(opt.z_init)}, {"num_samples", opt.subsets.num_samples},
          {"reports", std::move(reports)}};
}

/// Unit vectors in R^dim with inner product gamma: e_1 and (gamma, sqrt(1-gamma^2), 0, ...).
inline std::pair<Vector, Vector> unit_pair(double gamma, Index dim) {
  require(dim >= 2, "unit_pair: dimension must be at least 2");
  Vector x = Vector::Zero(dim), xp = Vector::Zero(dim);
  x(0) = 1.0;
  xp(0) = gamma;
  xp(1) = std::sqrt(std::max(0.0, (1.0 - gamma) * (1.0 + gamma)));
  return {x, xp};
}

/// CSV (gamma, fw, fz, mc_ew, mc_ez, abs_err_w, abs_err_z).
inline std::string kernels_csv(const std::vector<double>& gammas, std::int64_t samples,
                               std::uint64_t seed, Index dim) {
  std::ostringstream out;
  out << "gamma,fw,fz,mc_ew,mc_ez,abs_err_w,abs_err_z\n";
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const double g = gammas[i];
    const auto [x, xp] = unit_pair(g, dim);
    const KernelEstimate est = mc_kernel(x, xp, samples, mix64(seed + i));
    const double w = fw(g), z = fz(g);
    out << format_number(g) << ',' << format_number(w) << ',' << format_number(z) << ','
        << format_number(est.ew) << ',' << format_number(est.ez) << ','
        << format_number(std::abs(est.ew - w)) << ',' << format_number(std::abs(est.ez - z)) << '\n';
  }
  return out.str();
}

inline std::string drift_study_csv(const std::vector<DriftPoint>& points) {
  std::ostringstream out;
  out << "eta_scale,drift_max,drift_max_scaled_rates,status,T,flagged\n";
  for (const auto& p : points)
    out << format_number(p.eta_scale) << ',' << format_number(p.drift_max) << ','
        << format_number(p.drift_max_scaled_rates) << ',' << to_string(p.status) << ',' << p.T
        << ',' << (p.flagged ? 1 : 0) << '\n';
  return out.str();
}

/// The three per-width figures: kappa_H, kappa_D with the theory overlay, kappa_W.
inline std::map<std::string, std::string> plot_figures(const std::string& plot_csv, Index S) {
  const std::string suffix = "_S" + std::to_string(S) + ".svg";
  std::map<std::string, std::string> out;
  out["kappa_H" + suffix] =
      emit_svg(plot_csv, {"kappa_H vs m, S=" + std::to_string(S), "m", {"kappa_H_mean"}, {}});
  out["kappa_D" + suffix] = emit_svg(
      plot_csv, {"kappa_D vs m, S=" + std::to_string(S), "m", {"kappa_D_mean"}, {"theory_kappa_D"}});
  out["kappa_W" + suffix] =
      emit_svg(plot_csv, {"kappa_W vs m, S=" + std::to_string(S), "m", {"kappa_W_mean"}, {}});
  return out;
}

}  // namespace ntklab
