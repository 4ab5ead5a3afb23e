#pragma once

// Depth-2 ReLU regression network f(theta) = sigma(W X)^T z with quadratic loss,
// its layer-wise gradients, and the two NTK components H and G.

#include "ntklab/tensor_ops.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ntklab {

/// Network parameters: first layer W (S x n), output weights z (length S).
struct Theta {
  Matrix W;
  Vector z;

  Index width() const { return W.rows(); }
  Index input_dim() const { return W.cols(); }
};

/// Quantities derived from one forward pass at theta on data (X, y).
struct ForwardCache {
  Matrix preact;  // W X, S x m
  Matrix F;       // sigma(W X)
  Vector f;       // F^T z
  Vector e;       // f - y
  Matrix A;       // sigma'(W X), entries in {0, 1}
  Matrix B;       // diag(z) A
  std::size_t zero_hits = 0;  // exact zeros in W X, treated as inactive
};

struct NtkPair {
  Matrix H;  // (X^T X) o (B^T B)
  Matrix G;  // F^T F
};

/// sigma'(0) is taken to be 0; such kinks are counted in zero_hits.
inline ForwardCache forward(const Theta& theta, const Matrix& X, const Vector& y) {
  require(theta.W.cols() == X.rows(), "forward: W columns must match data dimension");
  require(theta.z.size() == theta.W.rows(), "forward: z length must match width");
  require(y.size() == X.cols(), "forward: label count must match sample count");

  ForwardCache c;
  c.preact = theta.W * X;
  const auto active = (c.preact.array() > 0.0);
  c.A = active.cast<double>().matrix();
  c.F = active.select(c.preact.array(), 0.0).matrix();
  c.zero_hits = static_cast<std::size_t>((c.preact.array() == 0.0).count());
  c.f = c.F.transpose() * theta.z;
  c.e = c.f - y;
  c.B = theta.z.asDiagonal() * c.A;
  return c;
}

inline double loss(const ForwardCache& cache) { return 0.5 * cache.e.squaredNorm(); }

/// First-layer gradient (B * X) e, reshaped so that row nu holds the block
/// z[nu] * sum_j A[nu, j] e[j] X^j.
inline Matrix grad_w(const ForwardCache& cache, const Matrix& X) {
  require(cache.B.cols() == X.cols(), "grad_w: cache does not match data");
  const Matrix weighted = cache.B * cache.e.asDiagonal();
  return weighted * X.transpose();
}

inline Vector grad_z(const ForwardCache& cache) { return cache.F * cache.e; }

inline NtkPair ntk(const ForwardCache& cache, const Matrix& X) {
  NtkPair p;
  const Matrix gram = X.transpose() * X;
  p.H = symmetrized(gram.cwiseProduct(cache.B.transpose() * cache.B));
  p.G = symmetrized(cache.F.transpose() * cache.F);
  return p;
}

/// First-layer NTK restricted to the neurons in gamma.
inline Matrix restricted_ntk_h(const ForwardCache& cache, const Matrix& X,
                               std::span<const Index> gamma) {
  require(!gamma.empty(), "restricted_ntk_h: empty neuron set");
  Matrix rows(static_cast<Index>(gamma.size()), cache.B.cols());
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    require(gamma[k] >= 0 && gamma[k] < cache.B.rows(), "restricted_ntk_h: neuron out of range");
    rows.row(static_cast<Index>(k)) = cache.B.row(gamma[k]);
  }
  const Matrix gram = X.transpose() * X;
  return symmetrized(gram.cwiseProduct(rows.transpose() * rows));
}

}  // namespace ntklab
