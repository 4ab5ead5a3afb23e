#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace ntklab;
using namespace ntklab::testing;

namespace {

Theta random_theta(Index S, Index n, std::mt19937_64& gen) {
  return {gaussian_matrix(S, n, gen), gaussian_matrix(S, 1, gen)};
}

}  // namespace

TEST(Forward, ZeroOutputWeights) {
  std::mt19937_64 gen(1);
  Theta t = random_theta(4, 3, gen);
  t.z.setZero();
  const Matrix X = unit_columns(3, 5, gen);
  const Vector y = gaussian_matrix(5, 1, gen);
  const ForwardCache c = forward(t, X, y);
  EXPECT_EQ(c.f, Vector::Zero(5));
  EXPECT_EQ(c.e, -y);
}

TEST(Forward, ZeroFirstLayerIsInactive) {
  std::mt19937_64 gen(2);
  Theta t{Matrix::Zero(4, 3), gaussian_matrix(4, 1, gen)};
  const Matrix X = unit_columns(3, 5, gen);
  const ForwardCache c = forward(t, X, Vector::Zero(5));
  EXPECT_EQ(c.F, Matrix::Zero(4, 5));
  EXPECT_EQ(c.A, Matrix::Zero(4, 5));
  EXPECT_EQ(c.zero_hits, 20u);
}

TEST(Forward, MatchesScalarLoops) {
  std::mt19937_64 gen(3);
  const Theta t = random_theta(4, 3, gen);
  const Matrix X = unit_columns(3, 5, gen);
  const Vector y = gaussian_matrix(5, 1, gen);
  const ForwardCache c = forward(t, X, y);
  for (Index j = 0; j < 5; ++j) {
    double f = 0.0;
    for (Index nu = 0; nu < 4; ++nu) {
      double pre = 0.0;
      for (Index i = 0; i < 3; ++i) pre += t.W(nu, i) * X(i, j);
      f += t.z(nu) * (pre > 0 ? pre : 0.0);
      EXPECT_EQ(c.A(nu, j), pre > 0 ? 1.0 : 0.0);
      EXPECT_EQ(c.B(nu, j), pre > 0 ? t.z(nu) : 0.0);
    }
    EXPECT_NEAR(c.f(j), f, 1e-12);
  }
  EXPECT_NEAR(loss(c), naive_loss(t.W, t.z, X, y), 1e-12);
}

TEST(Forward, ShapeMismatchRejected) {
  std::mt19937_64 gen(4);
  const Theta t = random_theta(4, 3, gen);
  EXPECT_THROW(forward(t, Matrix::Ones(2, 5), Vector::Zero(5)), std::invalid_argument);
  EXPECT_THROW(forward(t, Matrix::Ones(3, 5), Vector::Zero(4)), std::invalid_argument);
}

TEST(Loss, Examples) {
  ForwardCache c;
  c.e = Vector::Zero(3);
  EXPECT_EQ(loss(c), 0.0);
  c.e = Vector(2);
  c.e << 3, 4;
  EXPECT_DOUBLE_EQ(loss(c), 12.5);
  EXPECT_NEAR(loss(c), 0.5 * std::pow(frobenius_norm(c.e), 2), 1e-12);
}

TEST(Gradients, VanishWithZeroWeightsOrError) {
  std::mt19937_64 gen(5);
  Theta t = random_theta(4, 3, gen);
  const Matrix X = unit_columns(3, 5, gen);
  t.z.setZero();
  ForwardCache c = forward(t, X, gaussian_matrix(5, 1, gen));
  EXPECT_EQ(grad_w(c, X), Matrix::Zero(4, 3));

  t = random_theta(4, 3, gen);
  c = forward(t, X, Vector::Zero(5));
  c = forward(t, X, c.f);
  EXPECT_EQ(grad_w(c, X), Matrix::Zero(4, 3));
  EXPECT_EQ(grad_z(c), Vector::Zero(4));
}

TEST(Gradients, GradZWithIdentityFeatures) {
  ForwardCache c;
  c.F = Matrix::Identity(3, 3);
  c.e = Vector(3);
  c.e << 1, -2, 3;
  EXPECT_EQ(grad_z(c), c.e);
}

TEST(Gradients, FiniteDifferences) {
  std::mt19937_64 gen(6);
  std::uniform_int_distribution<int> dim(1, 10);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = regular_instance(dim(gen), dim(gen), dim(gen), gen);
    const GradientCheck g = finite_difference_check(inst);
    EXPECT_LT(g.worst_rel, 1e-5) << "trial " << trial;
  }
}

// Property: <grad, d> is the directional derivative of the loss at regular points.
TEST(Gradients, DirectionalDerivative) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = regular_instance(5, 6, 7, gen);
    const Matrix dW = gaussian_matrix(6, 5, gen);
    const Vector dz = gaussian_matrix(6, 1, gen);
    const ForwardCache c = forward(inst.theta0, inst.data.X, inst.data.y);
    const double analytic = grad_w(c, inst.data.X).cwiseProduct(dW).sum() + grad_z(c).dot(dz);
    const double h = 1e-7;
    const auto& t = inst.theta0;
    const double fd = (naive_loss(t.W + h * dW, t.z + h * dz, inst.data.X, inst.data.y) -
                       naive_loss(t.W - h * dW, t.z - h * dz, inst.data.X, inst.data.y)) /
                      (2 * h);
    EXPECT_NEAR(fd, analytic, 1e-5 * std::max(1.0, std::abs(analytic)));
  }
}

TEST(Ntk, ZeroOutputWeightsGiveZeroH) {
  std::mt19937_64 gen(8);
  Theta t = random_theta(4, 3, gen);
  t.z.setZero();
  const Matrix X = unit_columns(3, 5, gen);
  EXPECT_EQ(ntk(forward(t, X, Vector::Zero(5)), X).H, Matrix::Zero(5, 5));
}

TEST(Ntk, MatchesKhatriRaoGram) {
  std::mt19937_64 gen(9);
  const Theta t = random_theta(7, 4, gen);
  const Matrix X = unit_columns(4, 6, gen);
  const ForwardCache c = forward(t, X, Vector::Zero(6));
  const NtkPair p = ntk(c, X);
  const Matrix K = naive_khatri_rao(c.B, X);
  const Matrix want = K.transpose() * K;
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j)
      EXPECT_NEAR(p.H(i, j), want(i, j), 1e-10 * std::max(1.0, std::abs(want(i, j))));
  EXPECT_NEAR((p.G - c.F.transpose() * c.F).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_EQ(p.H, p.H.transpose());
  EXPECT_EQ(p.G, p.G.transpose());
}

TEST(Ntk, SingleSample) {
  std::mt19937_64 gen(10);
  const Theta t = random_theta(5, 3, gen);
  const Matrix X = unit_columns(3, 1, gen);
  const ForwardCache c = forward(t, X, Vector::Zero(1));
  const NtkPair p = ntk(c, X);
  EXPECT_NEAR(p.H(0, 0), c.B.col(0).squaredNorm(), 1e-12);
  EXPECT_NEAR(p.G(0, 0), c.F.col(0).squaredNorm(), 1e-12);
}

TEST(RestrictedNtk, FullSetAndComplementarySplit) {
  std::mt19937_64 gen(11);
  const Theta t = random_theta(8, 4, gen);
  const Matrix X = unit_columns(4, 6, gen);
  const ForwardCache c = forward(t, X, Vector::Zero(6));
  std::vector<Index> all(8);
  std::iota(all.begin(), all.end(), Index{0});
  const Matrix H = ntk(c, X).H;
  EXPECT_LT((restricted_ntk_h(c, X, all) - H).cwiseAbs().maxCoeff(), 1e-12);

  const std::vector<Index> first{0, 2, 5}, rest{1, 3, 4, 6, 7};
  const Matrix sum = restricted_ntk_h(c, X, first) + restricted_ntk_h(c, X, rest);
  EXPECT_LT((sum - H).cwiseAbs().maxCoeff(), 1e-12);

  const std::vector<Index> one{3};
  const Matrix H1 = restricted_ntk_h(c, X, one);
  EXPECT_GE(min_eigen_sym(H1), -1e-12);
  Eigen::FullPivLU<Matrix> lu(H1);
  lu.setThreshold(1e-10);
  EXPECT_LE(lu.rank(), 4);
}

TEST(RestrictedNtk, EmptyOrOutOfRangeRejected) {
  std::mt19937_64 gen(12);
  const Theta t = random_theta(3, 2, gen);
  const Matrix X = unit_columns(2, 2, gen);
  const ForwardCache c = forward(t, X, Vector::Zero(2));
  EXPECT_THROW(restricted_ntk_h(c, X, std::vector<Index>{}), std::invalid_argument);
  EXPECT_THROW(restricted_ntk_h(c, X, std::vector<Index>{3}), std::invalid_argument);
}

// Expectation link: entries of H0/S approach the first-layer limit kernel.
TEST(Ntk, FirstLayerLimitLink) {
  const ProblemDims dims{50, 60, 1000};
  const Instance inst = make_instance(dims, LabelMode::gaussian, ZInit::rademacher, 13);
  const ForwardCache c = forward(inst.theta0, inst.data.X, inst.data.y);
  const Matrix H = ntk(c, inst.data.X).H / 1000.0;
  const Matrix Hw = limit_matrices(inst.data.X).Hw;
  EXPECT_LE((H - Hw).cwiseAbs().maxCoeff(), 5.0 * std::sqrt(std::log(60.0) / 1000.0));
}
