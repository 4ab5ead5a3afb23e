#pragma once

#include "ntklab/quasirandom.hpp"
#include "ntklab/trainer.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>

namespace ntklab {

using json = nlohmann::json;

namespace detail {

// JSON has no NaN; non-finite values are written as null and read back as NaN.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double read_number(const json& j, const char* key) {
  const json& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

}  // namespace detail

inline json to_json(const RunReport& r) {
  json hist = json::array();
  for (const auto& s : r.error_history) hist.push_back({s.step, detail::number_or_null(s.norm)});
  json out{
      {"status", to_string(r.status)},
      {"nonfinite", r.nonfinite},
      {"T", r.T},
      {"kappa_H", detail::number_or_null(r.kappa_H)},
      {"lambda_min_H0", detail::number_or_null(r.lambda_min_H0)},
      {"lambda_min_HT", detail::number_or_null(r.lambda_min_HT)},
      {"lambda_min_G0", detail::number_or_null(r.lambda_min_G0)},
      {"lambda_min_GT", detail::number_or_null(r.lambda_min_GT)},
      {"D_count", r.D_count},
      {"kappa_D", r.kappa_D},
      {"w_displacement", detail::number_or_null(r.w_displacement)},
      {"kappa_W", detail::number_or_null(r.kappa_W)},
      {"z_displacement", detail::number_or_null(r.z_displacement)},
      {"flip_per_column_max", r.flip_per_column_max},
      {"flip_per_row_max", r.flip_per_row_max},
      {"zero_hit_total", r.zero_hit_total},
      {"invariant_drift", detail::number_or_null(r.invariant_drift)},
      {"activation_deviation", detail::number_or_null(r.activation_deviation)},
      {"error_history", std::move(hist)},
  };
  if (!r.lambda_history.empty()) {
    json lh = json::array();
    for (const auto& s : r.lambda_history) lh.push_back({s.step, detail::number_or_null(s.lambda_min_H)});
    out["lambda_history"] = std::move(lh);
  }
  return out;
}

inline RunReport run_report_from_json(const json& j) {
  RunReport r;
  r.status = parse_run_status(j.at("status").get<std::string>());
  r.nonfinite = j.at("nonfinite").get<bool>();
  r.T = j.at("T").get<std::int64_t>();
  r.kappa_H = detail::read_number(j, "kappa_H");
  r.lambda_min_H0 = detail::read_number(j, "lambda_min_H0");
  r.lambda_min_HT = detail::read_number(j, "lambda_min_HT");
  r.lambda_min_G0 = detail::read_number(j, "lambda_min_G0");
  r.lambda_min_GT = detail::read_number(j, "lambda_min_GT");
  r.D_count = j.at("D_count").get<std::int64_t>();
  r.kappa_D = j.at("kappa_D").get<double>();
  r.w_displacement = detail::read_number(j, "w_displacement");
  r.kappa_W = detail::read_number(j, "kappa_W");
  r.z_displacement = detail::read_number(j, "z_displacement");
  r.flip_per_column_max = j.at("flip_per_column_max").get<std::int64_t>();
  r.flip_per_row_max = j.at("flip_per_row_max").get<std::int64_t>();
  r.zero_hit_total = j.at("zero_hit_total").get<std::int64_t>();
  r.invariant_drift = detail::read_number(j, "invariant_drift");
  r.activation_deviation = detail::read_number(j, "activation_deviation");
  for (const auto& s : j.at("error_history")) {
    r.error_history.push_back(
        {s.at(0).get<std::int64_t>(),
         s.at(1).is_null() ? std::numeric_limits<double>::quiet_NaN() : s.at(1).get<double>()});
  }
  if (j.contains("lambda_history")) {
    for (const auto& s : j.at("lambda_history"))
      r.lambda_history.push_back({s.at(0).get<std::int64_t>(), s.at(1).get<double>()});
  }
  return r;
}

/// {name, observed, comparator, realized_constant, samples_used, pass_hint}
/// plus the bound direction, threshold, and flag.
inline json to_json(const PropertyReport& p) {
  json out{
      {"name", p.name},
      {"observed", detail::number_or_null(p.observed)},
      {"comparator", p.comparator},
      {"realized_constant", detail::number_or_null(p.realized_constant)},
      {"samples_used", p.samples_used},
      {"pass_hint", p.pass_hint},
      {"bound", to_string(p.bound)},
      {"threshold", p.threshold},
  };
  if (!p.flag.empty()) out["flag"] = p.flag;
  return out;
}

}  // namespace ntklab
