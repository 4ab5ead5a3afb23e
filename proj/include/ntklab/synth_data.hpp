#pragma once

// Random instances: unit-sphere data, Gaussian first layer, Rademacher or
// Gaussian output weights, and the label constructions used by the experiments.
//
// Each generator derives its own stream from the master seed with a fixed
// label ("X", "W0", "z0", "y"), so e.g. switching the z initialization never
// changes the data matrix.

#include "ntklab/network.hpp"
#include "ntklab/rng.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ntklab {

struct ProblemDims {
  Index n = 1;  // input dimension
  Index m = 1;  // sample count
  Index S = 1;  // hidden width

  void validate() const {
    require(n >= 1 && m >= 1 && S >= 1, "ProblemDims: n, m, S must be positive");
  }
};

struct DataSet {
  Matrix X;  // n x m, unit columns
  Vector y;  // length m
};

using InitTheta = Theta;

enum class LabelMode { gaussian, low_spectrum, high_spectrum, local, exact_fit };
enum class ZInit { rademacher, gaussian };

inline std::string to_string(LabelMode mode) {
  switch (mode) {
    case LabelMode::gaussian: return "gaussian";
    case LabelMode::low_spectrum: return "low_spectrum";
    case LabelMode::high_spectrum: return "high_spectrum";
    case LabelMode::local: return "local";
    case LabelMode::exact_fit: return "exact_fit";
  }
  return "unknown";
}

inline std::string to_string(ZInit z) {
  return z == ZInit::rademacher ? "rademacher" : "gaussian";
}

inline LabelMode parse_label_mode(std::string_view s) {
  if (s == "gaussian") return LabelMode::gaussian;
  if (s == "low_spectrum") return LabelMode::low_spectrum;
  if (s == "high_spectrum") return LabelMode::high_spectrum;
  if (s == "local") return LabelMode::local;
  if (s == "exact_fit") return LabelMode::exact_fit;
  throw std::invalid_argument("unknown label mode: " + std::string(s));
}

inline ZInit parse_z_init(std::string_view s) {
  if (s == "rademacher") return ZInit::rademacher;
  if (s == "gaussian") return ZInit::gaussian;
  throw std::invalid_argument("unknown z init: " + std::string(s));
}

/// Columns i.i.d. uniform on the unit sphere (normalized Gaussians).
inline Matrix sample_sphere_data(const ProblemDims& dims, std::uint64_t seed) {
  dims.validate();
  GaussianStream g(seed, "X");
  Matrix X(dims.n, dims.m);
  for (Index j = 0; j < dims.m; ++j) {
    double norm = 0.0;
    do {
      for (Index i = 0; i < dims.n; ++i) X(i, j) = g();
      norm = X.col(j).norm();
    } while (norm < 1e-30);
    X.col(j) /= norm;
  }
  return X;
}

inline InitTheta sample_init(const ProblemDims& dims, ZInit zinit, std::uint64_t seed) {
  dims.validate();
  InitTheta theta;
  GaussianStream gw(seed, "W0");
  theta.W.resize(dims.S, dims.n);
  // Row-major fill so that row nu depends only on the first (nu + 1) * n draws.
  for (Index nu = 0; nu < dims.S; ++nu)
    for (Index i = 0; i < dims.n; ++i) theta.W(nu, i) = gw();

  theta.z.resize(dims.S);
  if (zinit == ZInit::rademacher) {
    CounterRng rz(seed, "z0");
    for (Index nu = 0; nu < dims.S; ++nu) theta.z(nu) = (rz() >> 63) ? 1.0 : -1.0;
  } else {
    GaussianStream gz(seed, "z0");
    for (Index nu = 0; nu < dims.S; ++nu) theta.z(nu) = gz();
  }
  return theta;
}

/// Labels for the given mode. Except for gaussian and exact_fit, the initial
/// error e0 = f0 - y is prescribed and y is recovered as f0 - e0.
inline Vector make_labels(LabelMode mode, const Matrix& X, const InitTheta& theta0,
                          const ProblemDims& dims, std::uint64_t seed) {
  dims.validate();
  require(X.rows() == dims.n && X.cols() == dims.m, "make_labels: X shape does not match dims");
  const double scale = std::sqrt(static_cast<double>(dims.m) * static_cast<double>(dims.S));

  if (mode == LabelMode::gaussian) {
    GaussianStream g(seed, "y");
    const double sd = std::sqrt(static_cast<double>(dims.S));
    Vector y(dims.m);
    for (Index j = 0; j < dims.m; ++j) y(j) = sd * g();
    return y;
  }

  const ForwardCache cache = forward(theta0, X, Vector::Zero(dims.m));
  const Vector& f0 = cache.f;
  if (mode == LabelMode::exact_fit) return f0;

  Vector e0;
  switch (mode) {
    case LabelMode::low_spectrum: {
      EigenPair p = min_eigenpair_sym(ntk(cache, X).H);
      for (Index j = 0; j < p.vector.size(); ++j) {
        if (p.vector(j) != 0.0) {
          if (p.vector(j) < 0.0) p.vector = -p.vector;
          break;
        }
      }
      e0 = scale * p.vector.normalized();
      break;
    }
    case LabelMode::high_spectrum:
      e0 = std::sqrt(static_cast<double>(dims.n) * static_cast<double>(dims.S)) *
           (X.transpose() * X.col(0));
      break;
    case LabelMode::local:
      e0 = Vector::Zero(dims.m);
      e0(0) = scale;
      break;
    default:
      throw std::logic_error("make_labels: unhandled mode");
  }
  return f0 - e0;
}

}  // namespace ntklab
