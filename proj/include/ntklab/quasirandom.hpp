#pragma once

// Measurable versions of the quasirandom properties of data and initialization.
//
// Each check returns a PropertyReport comparing an observed statistic with the
// property's rate evaluated at (n, m, S) with unit constant. Polylogarithmic
// factors use one power of L = log(nS) unless the property names another power.
// Properties over all k-subsets of columns (or neurons) are estimated by
// uniform sampling plus one adversarial subset; below kExhaustiveLimit the
// subsets are enumerated exhaustively.

#include "ntklab/network.hpp"
#include "ntklab/rng.hpp"
#include "ntklab/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace ntklab {

/// Which side of the comparator the property wants the observation on.
enum class BoundKind { upper, lower, positive };

inline std::string to_string(BoundKind b) {
  switch (b) {
    case BoundKind::upper: return "upper";
    case BoundKind::lower: return "lower";
    case BoundKind::positive: return "positive";
  }
  return "unknown";
}

struct PropertyReport {
  std::string name;
  double observed = 0.0;
  double comparator = 1.0;
  double realized_constant = 0.0;
  std::int64_t samples_used = 0;
  bool pass_hint = false;
  BoundKind bound = BoundKind::upper;
  double threshold = 1.0;
  std::string flag;  // non-empty when an input was clamped or degenerate
};

struct SubsetSampleConfig {
  int num_samples = 200;
  bool include_adversarial = true;
  std::uint64_t seed = 0;
};

inline constexpr Index kExhaustiveLimit = 12;

/// Pass thresholds on realized_constant. For upper-bound properties a report
/// passes when realized_constant <= threshold; for lower-bound properties when
/// realized_constant >= threshold. Values come from pilot simulations at
/// n = 100, S = 1000, m = 500 and are configuration, not truth.
struct PropertyThresholds {
  std::map<std::string, double> values{
      {"almost_orthogonality", 1.5},
      {"submatrix_norm", 1.0},
      {"dual_sigma", 1.0},
      {"row_norms", 1.0},
      {"entries", 1.0},
      {"z_large", 1.0},
      {"regular", 0.0},
      {"w0x", 1.0},
      {"f0", 1.0},
      {"good_behavior", 1.0},
      {"ntk_g", 0.004},
      {"ntk_h_restricted", 0.08},
      {"bad_r", 1.0},
  };

  double at(const std::string& name) const {
    auto it = values.find(name);
    return it == values.end() ? 1.0 : it->second;
  }
};

inline double polylog(const ProblemDims& dims) {
  return std::log(static_cast<double>(dims.n) * static_cast<double>(dims.S));
}

inline PropertyReport make_report(std::string name, double observed, double comparator,
                                  BoundKind bound, std::int64_t samples,
                                  const PropertyThresholds& thr = {}) {
  require(comparator > 0.0, "PropertyReport: comparator must be positive");
  PropertyReport r;
  r.threshold = thr.at(name);
  r.name = std::move(name);
  r.observed = observed;
  r.comparator = comparator;
  r.realized_constant = observed / comparator;
  r.samples_used = samples;
  r.bound = bound;
  switch (bound) {
    case BoundKind::upper: r.pass_hint = r.realized_constant <= r.threshold; break;
    case BoundKind::lower: r.pass_hint = r.realized_constant >= r.threshold; break;
    case BoundKind::positive: r.pass_hint = observed > 0.0; break;
  }
  return r;
}

namespace detail {

/// k distinct indices from [0, n) by partial Fisher-Yates. Draws come from rng
/// in a fixed order, so the i-th sampled subset does not depend on how many
/// subsets are drawn after it.
inline std::vector<Index> sample_subset(Index n, Index k, CounterRng& rng) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const auto span = static_cast<std::uint64_t>(n - i);
    const Index pick = i + static_cast<Index>(rng() % span);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

/// Calls fn on every k-subset of [0, n) in lexicographic order.
template <typename Fn>
void for_each_subset(Index n, Index k, Fn&& fn) {
  std::vector<Index> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), Index{0});
  if (k > n) return;
  while (true) {
    fn(idx);
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

inline Matrix select_columns(const Matrix& X, const std::vector<Index>& cols) {
  Matrix out(X.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = X.col(cols[k]);
  return out;
}

/// Smallest of the min(rows, cols) singular values.
inline double smallest_singular(const Matrix& M) {
  return M.rows() >= M.cols() ? min_singular(M) : min_singular(M.transpose());
}

inline std::vector<Index> top_k_by(const Vector& score, Index k) {
  std::vector<Index> idx(static_cast<std::size_t>(score.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return score(a) > score(b); });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

inline PropertyReport check_almost_orthogonality(const Matrix& X, const ProblemDims& dims,
                                                 const PropertyThresholds& thr = {}) {
  const double comparator = polylog(dims) / std::sqrt(static_cast<double>(dims.n));
  if (X.cols() < 2) {
    PropertyReport r = make_report("almost_orthogonality", 0.0, comparator, BoundKind::upper, 0, thr);
    r.flag = "single column";
    return r;
  }
  Matrix gram = X.transpose() * X;
  gram.diagonal().setZero();
  const auto pairs = X.cols() * (X.cols() - 1) / 2;
  return make_report("almost_orthogonality", max_abs(gram), comparator, BoundKind::upper, pairs, thr);
}

/// max over k-column subsets J of ||X^J||, one report per k.
inline std::vector<PropertyReport> check_submatrix_norms(const Matrix& X,
                                                         const std::vector<Index>& k_values,
                                                         const SubsetSampleConfig& cfg,
                                                         const ProblemDims& dims,
                                                         const PropertyThresholds& thr = {}) {
  require(cfg.num_samples >= 1, "SubsetSampleConfig: num_samples must be >= 1");
  const Index m = X.cols();
  std::vector<PropertyReport> out;
  Vector leverage;
  if (cfg.include_adversarial && m > kExhaustiveLimit) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(X * X.transpose());
    const Vector top = es.eigenvectors().col(es.eigenvectors().cols() - 1);
    leverage = (X.transpose() * top).cwiseAbs();
  }
  for (std::size_t idx = 0; idx < k_values.size(); ++idx) {
    const Index k = k_values[idx];
    require(k >= 1 && k <= m, "check_submatrix_norms: k must lie in [1, m]");
    double best = 0.0;
    std::int64_t used = 0;
    if (k == m) {
      best = spectral_norm(X);
      used = 1;
    } else if (m <= kExhaustiveLimit) {
      detail::for_each_subset(m, k, [&](const std::vector<Index>& J) {
        best = std::max(best, spectral_norm(detail::select_columns(X, J)));
        ++used;
      });
    } else {
      CounterRng rng(cfg.seed, "submatrix_norm/" + std::to_string(k));
      for (int s = 0; s < cfg.num_samples; ++s) {
        const auto J = detail::sample_subset(m, k, rng);
        best = std::max(best, spectral_norm(detail::select_columns(X, J)));
        ++used;
      }
      if (cfg.include_adversarial) {
        best = std::max(best, spectral_norm(detail::select_columns(X, detail::top_k_by(leverage, k))));
        ++used;
      }
    }
    const double comparator =
        (1.0 + std::sqrt(static_cast<double>(k) / static_cast<double>(dims.n))) * polylog(dims);
    PropertyReport r = make_report("submatrix_norm", best, comparator, BoundKind::upper, used, thr);
    r.name = "submatrix_norm_k" + std::to_string(k);
    out.push_back(std::move(r));
  }
  return out;
}

inline Index default_n_star(const ProblemDims& dims) {
  const double ln = std::log(static_cast<double>(dims.n));
  const auto want = static_cast<Index>(std::ceil(static_cast<double>(dims.n) * ln * ln));
  return std::min(dims.m, std::max<Index>(want, 1));
}

/// min over n_star-column subsets J of sigma_min((X^J)^T).
inline PropertyReport check_dual_sigma(const Matrix& X, Index n_star, const SubsetSampleConfig& cfg,
                                       const ProblemDims& dims, const PropertyThresholds& thr = {}) {
  require(cfg.num_samples >= 1, "SubsetSampleConfig: num_samples must be >= 1");
  require(n_star >= 1, "check_dual_sigma: n_star must be positive");
  const Index m = X.cols();
  std::string flag;
  if (n_star > m) {
    n_star = m;
    flag = "n_star clamped to m";
  }
  double best = std::numeric_limits<double>::infinity();
  std::int64_t used = 0;
  auto visit = [&](const std::vector<Index>& J) {
    best = std::min(best, detail::smallest_singular(detail::select_columns(X, J).transpose()));
    ++used;
  };
  if (n_star == m) {
    std::vector<Index> all(static_cast<std::size_t>(m));
    std::iota(all.begin(), all.end(), Index{0});
    visit(all);
  } else if (m <= kExhaustiveLimit) {
    detail::for_each_subset(m, n_star, visit);
  } else {
    CounterRng rng(cfg.seed, "dual_sigma");
    for (int s = 0; s < cfg.num_samples; ++s) visit(detail::sample_subset(m, n_star, rng));
    if (cfg.include_adversarial) {
      // Greedy: start from the most collinear pair, then repeatedly add the
      // column with the largest total |inner product| against the chosen set.
      Matrix gram = (X.transpose() * X).cwiseAbs();
      gram.diagonal().setZero();
      Index a = 0, b = 0;
      gram.maxCoeff(&a, &b);
      std::vector<Index> J{a};
      if (n_star > 1) J.push_back(b);
      std::vector<bool> taken(static_cast<std::size_t>(m), false);
      for (Index j : J) taken[static_cast<std::size_t>(j)] = true;
      Vector score = gram.col(a);
      if (n_star > 1) score += gram.col(b);
      while (static_cast<Index>(J.size()) < n_star) {
        Index pick = -1;
        for (Index j = 0; j < m; ++j)
          if (!taken[static_cast<std::size_t>(j)] && (pick < 0 || score(j) > score(pick))) pick = j;
        taken[static_cast<std::size_t>(pick)] = true;
        J.push_back(pick);
        score += gram.col(pick);
      }
      std::sort(J.begin(), J.end());
      visit(J);
    }
  }
  const double comparator = static_cast<double>(dims.n) / static_cast<double>(m);
  PropertyReport r = make_report("dual_sigma", best, comparator, BoundKind::lower, used, thr);
  r.flag = flag;
  return r;
}

inline PropertyReport check_row_norms(const Matrix& W0, const PropertyThresholds& thr = {}) {
  const double observed = W0.rowwise().norm().minCoeff();
  const double comparator = std::sqrt(static_cast<double>(W0.cols()) / 2.0);
  return make_report("row_norms", observed, comparator, BoundKind::lower, W0.rows(), thr);
}

inline PropertyReport check_entries(const Theta& theta0, const ProblemDims& dims,
                                    const PropertyThresholds& thr = {}) {
  const double observed = std::max(max_abs(theta0.W), max_abs(theta0.z));
  return make_report("entries", observed, polylog(dims), BoundKind::upper,
                     theta0.W.size() + theta0.z.size(), thr);
}

inline double default_zeta0(ZInit zinit) { return zinit == ZInit::rademacher ? 1.0 : 0.5; }

inline std::vector<Index> large_z_neurons(const Vector& z0, double zeta0) {
  std::vector<Index> gamma;
  for (Index nu = 0; nu < z0.size(); ++nu)
    if (std::abs(z0(nu)) >= zeta0) gamma.push_back(nu);
  return gamma;
}

inline PropertyReport check_z_large(const Vector& z0, double zeta0, const ProblemDims& dims,
                                    const PropertyThresholds& thr = {}) {
  const auto count = static_cast<double>(large_z_neurons(z0, zeta0).size());
  const double comparator = static_cast<double>(dims.S) / polylog(dims);
  return make_report("z_large", count, comparator, BoundKind::lower, z0.size(), thr);
}

inline PropertyReport check_regular(const Theta& theta0, const Matrix& X,
                                    const PropertyThresholds& thr = {}) {
  const Matrix wx = theta0.W * X;
  const double observed = wx.size() ? wx.cwiseAbs().minCoeff() : 0.0;
  return make_report("regular", observed, 1.0, BoundKind::positive, wx.size(), thr);
}

inline PropertyReport check_w0x(const Theta& theta0, const Matrix& X, const ProblemDims& dims,
                                const PropertyThresholds& thr = {}) {
  const Matrix wx = theta0.W * X;
  return make_report("w0x", max_abs(wx), polylog(dims), BoundKind::upper, wx.size(), thr);
}

inline PropertyReport check_f0(const ForwardCache& cache, const ProblemDims& dims,
                               const PropertyThresholds& thr = {}) {
  const double comparator = std::sqrt(static_cast<double>(dims.S)) * polylog(dims);
  return make_report("f0", max_abs(cache.f), comparator, BoundKind::upper, cache.f.size(), thr);
}

/// Per-column counts |{nu : |(W0 X)[nu, j]| <= R}|.
inline Eigen::Array<std::int64_t, Eigen::Dynamic, 1> good_behavior_counts(const Matrix& w0x,
                                                                          double R) {
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> counts(w0x.cols());
  for (Index j = 0; j < w0x.cols(); ++j)
    counts(j) = static_cast<std::int64_t>((w0x.col(j).array().abs() <= R).count());
  return counts;
}

inline std::vector<double> default_r_grid(Index S) {
  std::vector<double> grid;
  const int hmax = static_cast<int>(std::ceil(std::log2(static_cast<double>(S))));
  for (int h = 0; h <= hmax; ++h) grid.push_back(std::ldexp(1.0, -h));
  return grid;
}

/// For each R: max_j count_j(R) / (S R + 1) against log(nS).
inline std::vector<PropertyReport> check_good_behavior(const Theta& theta0, const Matrix& X,
                                                       const std::vector<double>& r_grid,
                                                       const ProblemDims& dims,
                                                       const PropertyThresholds& thr = {}) {
  const Matrix wx = theta0.W * X;
  std::vector<PropertyReport> out;
  for (double R : r_grid) {
    require(R >= 0.0, "check_good_behavior: R must be nonnegative");
    const auto counts = good_behavior_counts(wx, R);
    const double worst = counts.size() ? static_cast<double>(counts.maxCoeff()) : 0.0;
    const double observed = worst / (static_cast<double>(dims.S) * R + 1.0);
    PropertyReport r = make_report("good_behavior", observed, polylog(dims), BoundKind::upper,
                                   wx.cols(), thr);
    r.name = "good_behavior_R" + std::to_string(R);
    out.push_back(std::move(r));
  }
  return out;
}

inline PropertyReport check_ntk_g(const ForwardCache& cache, const ProblemDims& dims,
                                  const PropertyThresholds& thr = {}) {
  const double lam = min_eigen_sym(cache.F.transpose() * cache.F);
  return make_report("ntk_g", lam, static_cast<double>(dims.S), BoundKind::lower, 1, thr);
}

inline Index default_s_star(const ProblemDims& dims) {
  const double n2 = static_cast<double>(dims.n) * static_cast<double>(dims.n);
  const double L = polylog(dims);
  return static_cast<Index>(std::floor(n2 * static_cast<double>(dims.S) /
                                       ((n2 + static_cast<double>(dims.m)) * L * L)));
}

namespace detail {

/// Unweighted restricted first-layer NTK (X^T X) o (A_G^T A_G), where A_G is
/// A restricted to gamma minus the `removed` neurons. `full_gram` is
/// A_gamma^T A_gamma for the whole gamma.
inline double restricted_lambda(const Matrix& xtx, const Matrix& A, const Matrix& full_gram,
                                const std::vector<Index>& removed) {
  Matrix gram = full_gram;
  for (Index nu : removed) gram.noalias() -= A.row(nu).transpose() * A.row(nu);
  return min_eigen_sym(xtx.cwiseProduct(gram));
}

}  // namespace detail

/// min over Gamma = Gamma0 minus s_star neurons of
/// lambda_min((X^T X) o ((A0)_Gamma^T (A0)_Gamma)).
inline PropertyReport check_ntk_h_restricted(const ForwardCache& cache, const Matrix& X,
                                             const Vector& z0, double zeta0, Index s_star,
                                             const SubsetSampleConfig& cfg, const ProblemDims& dims,
                                             const PropertyThresholds& thr = {}) {
  require(cfg.num_samples >= 1, "SubsetSampleConfig: num_samples must be >= 1");
  require(s_star >= 0, "check_ntk_h_restricted: s_star must be nonnegative");
  const std::vector<Index> gamma0 = large_z_neurons(z0, zeta0);
  const auto g0 = static_cast<Index>(gamma0.size());
  require(s_star < g0, "check_ntk_h_restricted: s_star must be smaller than |Gamma0|");

  const Matrix& A = cache.A;
  const Matrix xtx = X.transpose() * X;
  Matrix full_gram = Matrix::Zero(A.cols(), A.cols());
  for (Index nu : gamma0) full_gram.noalias() += A.row(nu).transpose() * A.row(nu);

  double best = std::numeric_limits<double>::infinity();
  std::int64_t used = 0;
  auto visit = [&](const std::vector<Index>& local) {
    std::vector<Index> removed;
    removed.reserve(local.size());
    for (Index k : local) removed.push_back(gamma0[static_cast<std::size_t>(k)]);
    best = std::min(best, detail::restricted_lambda(xtx, A, full_gram, removed));
    ++used;
  };

  if (s_star == 0) {
    visit({});
  } else if (g0 <= kExhaustiveLimit) {
    detail::for_each_subset(g0, s_star, visit);
  } else {
    CounterRng rng(cfg.seed, "ntk_h_restricted");
    for (int s = 0; s < cfg.num_samples; ++s) visit(detail::sample_subset(g0, s_star, rng));
    if (cfg.include_adversarial) {
      // Drop the neurons contributing most to the Rayleigh quotient of the
      // bottom eigenvector: contribution_nu = ||X (A_nu o v)||^2.
      const EigenPair p = min_eigenpair_sym(xtx.cwiseProduct(full_gram));
      Vector score(g0);
      for (Index k = 0; k < g0; ++k) {
        const Index nu = gamma0[static_cast<std::size_t>(k)];
        score(k) = (X * A.row(nu).transpose().cwiseProduct(p.vector)).squaredNorm();
      }
      visit(detail::top_k_by(score, s_star));
    }
  }
  return make_report("ntk_h_restricted", best, static_cast<double>(dims.S), BoundKind::lower, used,
                     thr);
}

/// Bad_R(w, X) = |{j : |w^T X^j| <= R}| against (mR + 1) log(nS)^2.
inline std::vector<PropertyReport> check_bad_r(const Vector& w, const Matrix& X,
                                               const std::vector<double>& r_grid,
                                               const ProblemDims& dims,
                                               const PropertyThresholds& thr = {}) {
  require(w.size() == X.rows(), "check_bad_r: w dimension mismatch");
  const Vector proj = (X.transpose() * w).cwiseAbs();
  const double L = polylog(dims);
  std::vector<PropertyReport> out;
  for (double R : r_grid) {
    const auto count = static_cast<double>((proj.array() <= R).count());
    const double comparator = (static_cast<double>(X.cols()) * R + 1.0) * L * L;
    PropertyReport r = make_report("bad_r", count, comparator, BoundKind::upper, X.cols(), thr);
    r.name = "bad_r_R" + std::to_string(R);
    out.push_back(std::move(r));
  }
  return out;
}

/// Every check on one sampled instance.
struct PropertySuiteOptions {
  ZInit z_init = ZInit::rademacher;
  SubsetSampleConfig subsets;
  PropertyThresholds thresholds;
};

inline std::vector<PropertyReport> run_property_suite(const ProblemDims& dims, std::uint64_t seed,
                                                      const PropertySuiteOptions& opt = {}) {
  dims.validate();
  const Matrix X = sample_sphere_data(dims, seed);
  const Theta theta0 = sample_init(dims, opt.z_init, seed);
  const ForwardCache cache = forward(theta0, X, Vector::Zero(dims.m));
  const auto& thr = opt.thresholds;
  SubsetSampleConfig sub = opt.subsets;
  sub.seed = seed;

  std::vector<PropertyReport> out;
  out.push_back(check_almost_orthogonality(X, dims, thr));
  std::vector<Index> ks;
  for (Index k : {Index{1}, dims.n / 2, dims.n, 2 * dims.n, dims.m})
    if (k >= 1 && k <= dims.m && std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
  for (auto& r : check_submatrix_norms(X, ks, sub, dims, thr)) out.push_back(std::move(r));
  out.push_back(check_dual_sigma(X, default_n_star(dims), sub, dims, thr));
  out.push_back(check_row_norms(theta0.W, thr));
  out.push_back(check_entries(theta0, dims, thr));
  const double zeta0 = default_zeta0(opt.z_init);
  out.push_back(check_z_large(theta0.z, zeta0, dims, thr));
  out.push_back(check_regular(theta0, X, thr));
  out.push_back(check_w0x(theta0, X, dims, thr));
  out.push_back(check_f0(cache, dims, thr));
  for (auto& r : check_good_behavior(theta0, X, default_r_grid(dims.S), dims, thr))
    out.push_back(std::move(r));
  out.push_back(check_ntk_g(cache, dims, thr));
  const Index gamma_size = static_cast<Index>(large_z_neurons(theta0.z, zeta0).size());
  if (gamma_size > 0) {
    const Index s_star = std::min(default_s_star(dims), gamma_size - 1);
    out.push_back(check_ntk_h_restricted(cache, X, theta0.z, zeta0, s_star, sub, dims, thr));
  }
  // Bad_R is stated for w on the sphere of radius sqrt(n); use the first row of
  // W0 rescaled to that norm.
  const Vector w = theta0.W.row(0).transpose().normalized() * std::sqrt(static_cast<double>(dims.n));
  for (auto& r : check_bad_r(w, X, default_r_grid(dims.S), dims, thr)) out.push_back(std::move(r));
  return out;
}

}  // namespace ntklab
