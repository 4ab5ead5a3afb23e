#pragma once

// Infinite-width NTK kernels for standard Gaussian first-layer weights:
//   fw(g) = E[<x,x'> sigma'(<w,x>) sigma'(<w,x'>)] = g (1/2 - arccos(g) / (2 pi))
//   fz(g) = E[sigma(<w,x>) sigma(<w,x'>)]          = (g (pi - arccos g) + sqrt(1 - g^2)) / (2 pi)
// as functions of g = <x, x'> for unit x, x'.

#include "ntklab/rng.hpp"
#include "ntklab/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ntklab {

namespace detail {

inline double clamp_gamma(double gamma) {
  require(std::isfinite(gamma) && std::abs(gamma) <= 1.0 + 1e-12,
          "kernel argument outside [-1, 1]");
  return std::clamp(gamma, -1.0, 1.0);
}

/// arccos with the half-angle form near +-1, where acos loses relative accuracy.
inline double stable_acos(double g) {
  if (g > 0.999) return 2.0 * std::asin(std::sqrt(0.5 * (1.0 - g)));
  if (g < -0.999) return std::numbers::pi - 2.0 * std::asin(std::sqrt(0.5 * (1.0 + g)));
  return std::acos(g);
}

}  // namespace detail

inline double fw(double gamma) {
  const double g = detail::clamp_gamma(gamma);
  return g * (0.5 - detail::stable_acos(g) / (2.0 * std::numbers::pi));
}

inline double fz(double gamma) {
  const double g = detail::clamp_gamma(gamma);
  const double root = std::sqrt((1.0 - g) * (1.0 + g));
  return (g * (std::numbers::pi - detail::stable_acos(g)) + root) / (2.0 * std::numbers::pi);
}

inline constexpr double kSeriesLimit = 0.99;
inline constexpr int kSeriesMaxTerms = 500;

// Both series are built from
//   arcsin(g)    = sum_r a_r g^(2r+1) / (2r+1),  a_r = (2r)! / (4^r (r!)^2),
//   sqrt(1-g^2)  = sum_k t_k g^(2k),             t_k = t_{k-1} (k - 3/2) / k,
// using fw(g) = g/4 + g arcsin(g) / (2 pi)
// and   fz(g) = g/4 + (g arcsin(g) + sqrt(1 - g^2)) / (2 pi).

inline double fw_series(double gamma, double tol) {
  require(std::abs(gamma) <= kSeriesLimit, "fw_series: |gamma| > 0.99, use the closed form");
  require(tol > 0.0, "fw_series: tol must be positive");
  const double g2 = gamma * gamma;
  double sum = 0.25 * gamma;
  double a = 1.0;          // a_r
  double power = g2;       // g^(2r+2)
  for (int r = 0; r < kSeriesMaxTerms; ++r) {
    if (r > 0) {
      a *= (2.0 * r - 1.0) / (2.0 * r);
      power *= g2;
    }
    const double term = a / (2.0 * r + 1.0) * power / (2.0 * std::numbers::pi);
    sum += term;
    if (std::abs(term) < tol) break;
  }
  return sum;
}

inline double fz_series(double gamma, double tol) {
  require(std::abs(gamma) <= kSeriesLimit, "fz_series: |gamma| > 0.99, use the closed form");
  require(tol > 0.0, "fz_series: tol must be positive");
  const double g2 = gamma * gamma;
  const double inv2pi = 1.0 / (2.0 * std::numbers::pi);
  double sum = inv2pi;  // k = 0 term of the square root
  if (gamma == 0.0) return sum;
  sum += 0.25 * gamma;
  double a = 1.0;   // a_{k-1}
  double t = 1.0;   // t_k
  double power = 1.0;
  for (int k = 1; k < kSeriesMaxTerms; ++k) {
    if (k > 1) a *= (2.0 * (k - 1) - 1.0) / (2.0 * (k - 1));
    t *= (k - 1.5) / k;
    power *= g2;
    const double coeff = a / (2.0 * (k - 1) + 1.0) + t;
    const double term = coeff * power * inv2pi;
    sum += term;
    if (std::abs(term) < tol) break;
  }
  return sum;
}

struct LimitMatrices {
  Matrix Hw;
  Matrix Hz;
};

inline LimitMatrices limit_matrices(const Matrix& X) {
  const Matrix gram = X.transpose() * X;
  const Index m = X.cols();
  LimitMatrices out{Matrix(m, m), Matrix(m, m)};
  for (Index j = 0; j < m; ++j) {
    out.Hw(j, j) = 0.5;
    out.Hz(j, j) = 0.5;
    for (Index k = j + 1; k < m; ++k) {
      const double g = std::clamp(gram(j, k), -1.0, 1.0);
      out.Hw(j, k) = out.Hw(k, j) = fw(g);
      out.Hz(j, k) = out.Hz(k, j) = fz(g);
    }
  }
  return out;
}

struct KernelEstimate {
  double ew = 0.0;
  double ez = 0.0;
};

/// Monte Carlo estimate of both kernels with w ~ N(0, I_n).
inline KernelEstimate mc_kernel(const Vector& x, const Vector& xp, std::int64_t num_samples,
                                std::uint64_t seed) {
  require(x.size() == xp.size() && x.size() > 0, "mc_kernel: dimension mismatch");
  require(std::abs(x.norm() - 1.0) <= 1e-10 && std::abs(xp.norm() - 1.0) <= 1e-10,
          "mc_kernel: inputs must be unit vectors");
  require(num_samples >= 1, "mc_kernel: need at least one sample");
  const double inner = x.dot(xp);
  GaussianStream g(seed, "mc_kernel");
  Vector w(x.size());
  double sum_w = 0.0;
  double sum_z = 0.0;
  for (std::int64_t s = 0; s < num_samples; ++s) {
    for (Index i = 0; i < w.size(); ++i) w(i) = g();
    const double u = w.dot(x);
    const double v = w.dot(xp);
    if (u > 0.0 && v > 0.0) {
      sum_w += inner;
      sum_z += u * v;
    }
  }
  const double N = static_cast<double>(num_samples);
  return {sum_w / N, sum_z / N};
}

}  // namespace ntklab
