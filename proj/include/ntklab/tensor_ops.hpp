#pragma once

// Dense matrix utilities: entrywise and column-wise Khatri-Rao products,
// norms, and the extreme eigen/singular values used throughout the lab.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ntklab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

/// Entrywise (Hadamard) product.
inline Matrix hadamard(const Matrix& lhs, const Matrix& rhs) {
  require(lhs.rows() == rhs.rows() && lhs.cols() == rhs.cols(),
          "hadamard: shape mismatch");
  return lhs.cwiseProduct(rhs);
}

/// Column-wise Khatri-Rao product of A (S x m) and X (n x m).
///
/// Row (nu, i) of the result, stored at index nu * n + i, holds A(nu, j) * X(i, j)
/// in column j. This is the row layout the first-layer gradient reshape assumes.
inline Matrix khatri_rao(const Matrix& a, const Matrix& x) {
  require(a.cols() == x.cols(), "khatri_rao: column-count mismatch");
  const Index s = a.rows();
  const Index n = x.rows();
  Matrix out(s * n, a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index nu = 0; nu < s; ++nu) {
      out.col(j).segment(nu * n, n) = a(nu, j) * x.col(j);
    }
  }
  return out;
}

inline double frobenius_norm(const Matrix& m) { return m.norm(); }

/// Largest entry in absolute value (the entrywise infinity norm).
inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Eigenvalues of a square matrix after symmetrization, ascending.
inline Vector sym_eigenvalues(const Matrix& m) {
  require(m.rows() == m.cols(), "sym_eigenvalues: matrix is not square");
  require(m.rows() > 0, "sym_eigenvalues: empty matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(m), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  return solver.eigenvalues();
}

inline double min_eigen_sym(const Matrix& m) { return sym_eigenvalues(m)(0); }

inline double max_eigen_sym(const Matrix& m) {
  const Vector ev = sym_eigenvalues(m);
  return ev(ev.size() - 1);
}

struct EigenPair {
  double value = 0.0;
  Vector vector;
};

/// Smallest eigenvalue of the symmetrized matrix with a unit eigenvector.
inline EigenPair min_eigenpair_sym(const Matrix& m) {
  require(m.rows() == m.cols() && m.rows() > 0, "min_eigenpair_sym: matrix is not square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(m));
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  return {solver.eigenvalues()(0), solver.eigenvectors().col(0)};
}

/// Largest singular value, via the Gram matrix of the shorter side.
inline double spectral_norm(const Matrix& m) {
  require(m.size() > 0, "spectral_norm: empty matrix");
  const Matrix gram = m.rows() >= m.cols() ? Matrix(m.transpose() * m) : Matrix(m * m.transpose());
  return std::sqrt(std::max(0.0, max_eigen_sym(gram)));
}

/// Smallest singular value of a tall (rows >= cols) matrix: sqrt(lambda_min(M^T M)).
inline double min_singular(const Matrix& m) {
  require(m.size() > 0, "min_singular: empty matrix");
  require(m.rows() >= m.cols(), "min_singular: rows < cols, transpose first");
  return std::sqrt(std::max(0.0, min_eigen_sym(m.transpose() * m)));
}

}  // namespace ntklab
