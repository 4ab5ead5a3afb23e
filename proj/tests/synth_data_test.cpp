#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace ntklab;
using namespace ntklab::testing;

TEST(SphereData, UnitColumnsAndDeterminism) {
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    const ProblemDims dims{17, 33, 5};
    const Matrix X = sample_sphere_data(dims, seed);
    for (Index j = 0; j < X.cols(); ++j) EXPECT_NEAR(X.col(j).norm(), 1.0, 1e-12);
    EXPECT_EQ(X, sample_sphere_data(dims, seed));
  }
  EXPECT_NE(sample_sphere_data({5, 5, 1}, 1), sample_sphere_data({5, 5, 1}, 2));
}

TEST(SphereData, InvalidDimsRejected) {
  EXPECT_THROW(sample_sphere_data({0, 5, 5}, 0), std::invalid_argument);
}

// Band: 5th-95th percentile of the median over 50 seeds from a numpy simulation.
TEST(SphereData, MaxInnerProductBand) {
  std::vector<double> maxima;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix X = sample_sphere_data({100, 200, 1}, seed);
    Matrix g = (X.transpose() * X).cwiseAbs();
    g.diagonal().setZero();
    maxima.push_back(g.maxCoeff());
  }
  std::nth_element(maxima.begin(), maxima.begin() + 25, maxima.end());
  const double hi = maxima[25];
  const double lo = *std::max_element(maxima.begin(), maxima.begin() + 25);
  const double median = 0.5 * (lo + hi);
  EXPECT_GE(median, 0.3936);
  EXPECT_LE(median, 0.4072);
}

TEST(Init, RademacherEntries) {
  const InitTheta t = sample_init({10, 1, 500}, ZInit::rademacher, 3);
  EXPECT_EQ(t.z.size(), 500);
  EXPECT_EQ(t.W.rows(), 500);
  EXPECT_EQ(t.W.cols(), 10);
  for (Index nu = 0; nu < 500; ++nu) EXPECT_EQ(std::abs(t.z(nu)), 1.0);
  const Index plus = (t.z.array() > 0).count();
  EXPECT_GT(plus, 180);
  EXPECT_LT(plus, 320);
}

TEST(Init, GaussianMoments) {
  const InitTheta t = sample_init({100, 1, 1000}, ZInit::rademacher, 4);
  const double mean = t.W.mean();
  const double var = (t.W.array() - mean).square().sum() / static_cast<double>(t.W.size() - 1);
  EXPECT_LT(std::abs(mean), 0.02);
  EXPECT_GE(var, 0.95);
  EXPECT_LE(var, 1.05);
}

TEST(Init, DeterministicAndIndependentOfZMode) {
  const ProblemDims dims{8, 1, 20};
  const InitTheta a = sample_init(dims, ZInit::gaussian, 11);
  const InitTheta b = sample_init(dims, ZInit::gaussian, 11);
  EXPECT_EQ(a.W, b.W);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(sample_init(dims, ZInit::rademacher, 11).W, a.W);
}

TEST(Labels, ExactFitHasZeroError) {
  const ProblemDims dims{20, 30, 40};
  const Instance inst = make_instance(dims, LabelMode::exact_fit, ZInit::rademacher, 5);
  const ForwardCache c = forward(inst.theta0, inst.data.X, inst.data.y);
  EXPECT_EQ(c.e.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Labels, LocalConcentratesOnFirstInstance) {
  const ProblemDims dims{100, 100, 100};
  const Instance inst = make_instance(dims, LabelMode::local, ZInit::rademacher, 6);
  const Vector e = forward(inst.theta0, inst.data.X, inst.data.y).e;
  EXPECT_NEAR(e.norm(), 100.0, 1e-8);
  EXPECT_NEAR(std::abs(e(0)), 100.0, 1e-8);
  EXPECT_LT(e.tail(99).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Labels, LowSpectrumIsBottomEigenvector) {
  const ProblemDims dims{30, 40, 50};
  const Instance inst = make_instance(dims, LabelMode::low_spectrum, ZInit::rademacher, 7);
  const ForwardCache c = forward(inst.theta0, inst.data.X, inst.data.y);
  const double scale = std::sqrt(40.0 * 50.0);
  EXPECT_NEAR(c.e.norm(), scale, 1e-8);
  const Matrix H = ntk(c, inst.data.X).H;
  const Vector u = c.e / c.e.norm();
  const double lmin = general_eigen_min(H);
  EXPECT_LT((H * u - lmin * u).cwiseAbs().maxCoeff(), 1e-6 * 50.0);
}

TEST(Labels, HighSpectrumIsScaledFirstGramColumn) {
  const ProblemDims dims{30, 40, 50};
  const Instance inst = make_instance(dims, LabelMode::high_spectrum, ZInit::rademacher, 8);
  const ForwardCache c = forward(inst.theta0, inst.data.X, inst.data.y);
  const Matrix& X = inst.data.X;
  const double scale = std::sqrt(30.0 * 50.0);
  for (Index j = 0; j < 40; ++j) {
    double dot = 0.0;
    for (Index i = 0; i < 30; ++i) dot += X(i, j) * X(i, 0);
    EXPECT_NEAR(c.e(j), scale * dot, 1e-9);
  }
  EXPECT_NEAR(c.e(0), scale, 1e-9);
}

TEST(Labels, GaussianScaleAndDeterminism) {
  const ProblemDims dims{10, 4000, 100};
  const Instance a = make_instance(dims, LabelMode::gaussian, ZInit::rademacher, 9);
  const Instance b = make_instance(dims, LabelMode::gaussian, ZInit::rademacher, 9);
  EXPECT_EQ(a.data.y, b.data.y);
  const double var = a.data.y.squaredNorm() / 4000.0;
  EXPECT_NEAR(var, 100.0, 100.0 * 5.0 * std::sqrt(2.0 / 4000.0));
}

TEST(Labels, ParseRoundTrip) {
  for (auto m : {LabelMode::gaussian, LabelMode::low_spectrum, LabelMode::high_spectrum,
                 LabelMode::local, LabelMode::exact_fit})
    EXPECT_EQ(parse_label_mode(to_string(m)), m);
  EXPECT_THROW(parse_label_mode("uniform"), std::invalid_argument);
  EXPECT_EQ(parse_z_init("gaussian"), ZInit::gaussian);
  EXPECT_THROW(parse_z_init("ones"), std::invalid_argument);
}

TEST(Rng, RunSeedsDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t S : {100, 200})
    for (std::uint64_t m : {100, 1000})
      for (std::uint64_t rep = 0; rep < 10; ++rep) seen.insert(run_seed(0, S, m, rep));
  EXPECT_EQ(seen.size(), 40u);
  EXPECT_NE(stream_key(1, "X"), stream_key(1, "W0"));
}
