#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace ntklab;
using namespace ntklab::testing;

TEST(Hadamard, IdentityAndZero) {
  std::mt19937_64 gen(1);
  const Matrix M = gaussian_matrix(3, 4, gen);
  EXPECT_EQ(hadamard(M, Matrix::Ones(3, 4)), M);
  EXPECT_EQ(hadamard(M, Matrix::Zero(3, 4)), Matrix::Zero(3, 4));
}

TEST(Hadamard, SmallExample) {
  Matrix a(2, 2), b(2, 2), want(2, 2);
  a << 1, 2, 3, 4;
  b << 5, 6, 7, 8;
  want << 5, 12, 21, 32;
  EXPECT_EQ(hadamard(a, b), want);
}

TEST(Hadamard, ShapeMismatchRejected) {
  EXPECT_THROW(hadamard(Matrix::Ones(2, 3), Matrix::Ones(3, 2)), std::invalid_argument);
}

TEST(KhatriRao, AllOnesStacksX) {
  std::mt19937_64 gen(2);
  const Matrix X = unit_columns(3, 5, gen);
  const Matrix K = khatri_rao(Matrix::Ones(2, 5), X);
  ASSERT_EQ(K.rows(), 6);
  EXPECT_EQ(K.topRows(3), X);
  EXPECT_EQ(K.bottomRows(3), X);
}

TEST(KhatriRao, OnesRowPreservesUnitColumns) {
  std::mt19937_64 gen(3);
  const Matrix X = unit_columns(4, 6, gen);
  const Matrix K = khatri_rao(Matrix::Ones(1, 6), X);
  for (Index j = 0; j < 6; ++j) EXPECT_NEAR(K.col(j).norm(), 1.0, 1e-15);
}

TEST(KhatriRao, GramIdentityAndLayout) {
  std::mt19937_64 gen(4);
  const Matrix A = gaussian_matrix(3, 4, gen);
  const Matrix X = gaussian_matrix(2, 4, gen);
  const Matrix K = khatri_rao(A, X);
  EXPECT_EQ(K, naive_khatri_rao(A, X));
  const Matrix lhs = K.transpose() * K;
  const Matrix rhs = (A.transpose() * A).cwiseProduct(X.transpose() * X);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      EXPECT_NEAR(lhs(i, j), rhs(i, j), 1e-12 * std::max(1.0, std::abs(rhs(i, j))));
}

TEST(KhatriRao, ColumnMismatchRejected) {
  EXPECT_THROW(khatri_rao(Matrix::Ones(2, 3), Matrix::Ones(2, 4)), std::invalid_argument);
}

TEST(SpectralNorm, Examples) {
  EXPECT_NEAR(spectral_norm(Matrix::Identity(5, 5)), 1.0, 1e-14);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  EXPECT_NEAR(spectral_norm(d), 3.0, 1e-14);
  Matrix nil = Matrix::Zero(2, 2);
  nil(0, 1) = 1;
  EXPECT_NEAR(spectral_norm(nil), 1.0, 1e-14);
}

TEST(MinEigenSym, Examples) {
  EXPECT_NEAR(min_eigen_sym(Matrix::Identity(4, 4)), 1.0, 1e-14);
  Vector d(3);
  d << 5, -2, 0;
  EXPECT_NEAR(min_eigen_sym(d.asDiagonal().toDenseMatrix()), -2.0, 1e-14);
}

TEST(MinEigenSym, GramMatchesGeneralSolver) {
  std::mt19937_64 gen(5);
  const Matrix B = gaussian_matrix(4, 6, gen);
  const Matrix G = B.transpose() * B;
  const double got = min_eigen_sym(G);
  EXPECT_GE(got, -1e-10);
  EXPECT_NEAR(got, general_eigen_min(G), 1e-8);
}

TEST(FrobeniusNorm, Examples) {
  EXPECT_EQ(frobenius_norm(Matrix::Zero(3, 3)), 0.0);
  EXPECT_NEAR(frobenius_norm(Matrix::Identity(7, 7)), std::sqrt(7.0), 1e-14);
  Matrix r(1, 2);
  r << 3, 4;
  EXPECT_NEAR(frobenius_norm(r), 5.0, 1e-14);
}

TEST(MinSingular, Examples) {
  EXPECT_NEAR(min_singular(Matrix::Identity(3, 3)), 1.0, 1e-14);
  std::mt19937_64 gen(6);
  Matrix tall = gaussian_matrix(6, 3, gen);
  tall.col(1).setZero();
  EXPECT_NEAR(min_singular(tall), 0.0, 1e-7);
  const Matrix G = gaussian_matrix(8, 3, gen);
  EXPECT_NEAR(min_singular(G), svd_min(G), 1e-8);
}

TEST(MinSingular, WideRejected) {
  EXPECT_THROW(min_singular(Matrix::Ones(2, 3)), std::invalid_argument);
}

// Property: dense oracles agree on every size up to 50 x 50.
TEST(DenseOracles, AgreeUpTo50) {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> dim(1, 50);
  for (int trial = 0; trial < 40; ++trial) {
    const Index r = dim(gen), c = dim(gen);
    const Matrix M = gaussian_matrix(r, c, gen);
    EXPECT_NEAR(spectral_norm(M), svd_max(M), 1e-8 * std::max(1.0, svd_max(M)));
    const Matrix sym = symmetrized(gaussian_matrix(r, r, gen));
    EXPECT_NEAR(min_eigen_sym(sym), general_eigen_min(sym), 1e-8);
    Eigen::EigenSolver<Matrix> es(sym, false);
    EXPECT_NEAR(max_eigen_sym(sym), es.eigenvalues().real().maxCoeff(), 1e-8);
  }
}

TEST(MinEigenpair, EigenEquation) {
  std::mt19937_64 gen(8);
  const Matrix B = gaussian_matrix(10, 6, gen);
  const Matrix G = B.transpose() * B;
  const EigenPair p = min_eigenpair_sym(G);
  EXPECT_NEAR(p.vector.norm(), 1.0, 1e-12);
  EXPECT_LT((G * p.vector - p.value * p.vector).norm(), 1e-10);
}

// Property: the Gram identity, Shur bounds, weighted bounds and the
// Frobenius-spectral product bound hold on random instances.
TEST(Identities, RandomInstances) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 100; ++trial) {
    const IdentityResult r = check_identities(gen);
    EXPECT_TRUE(r.ok) << "trial " << trial << ": " << r.failure;
  }
}
