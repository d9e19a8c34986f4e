#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ftd/conditions.hpp"
#include "ftd/experiments.hpp"
#include "ftd/network.hpp"

using namespace ftd;

namespace {

Matrix example_a() {
  Matrix a(3, 3);
  a << -5, 2, 3, 1, -4, 3, 1, 2, -3;
  return a;
}

/// Random irreducible Metzler matrix with zero row sums: a directed ring plus extra edges.
Matrix random_coupling(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> w(0.1, 3.0);
  std::bernoulli_distribution extra(0.4);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, (i + 1) % n) = w(rng);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && a(i, j) == 0.0 && extra(rng)) a(i, j) = w(rng);
    }
    a(i, i) = -a.row(i).sum();
  }
  return a;
}

}  // namespace

TEST(ScalarTheorem, TwoNormThresholdOfReferenceExample) {
  // Threshold 1 + 2^1.05 at eps1 = 2^0.05 with beta = 0, 1 + eta = 2^0.1.
  const StaticScalarGains g{1.0, 2.0, 2.1, 3.5};
  const auto r = check_scalar_theorem(g, 1, 0.0, std::pow(2.0, 0.1) - 1.0, Norm::Two,
                                      std::pow(2.0, 0.05));
  EXPECT_NEAR(r.linear_gain_threshold, 1.0 + std::pow(2.0, 1.05), 1e-6);
  EXPECT_NEAR(r.linear_gain_threshold, 3.071, 5e-4);
  EXPECT_NEAR(r.eps1_optimal, std::pow(2.0, 0.05), 1e-12);
  EXPECT_TRUE(r.feasible);
  EXPECT_NEAR(r.lhs, 2.0 * (1.0 + std::pow(2.0, 1.05) - 3.5), 1e-12);
  EXPECT_DOUBLE_EQ(r.sign_gain_threshold, 2.0);
  EXPECT_NEAR(r.epsilon2_max, 0.1, 1e-12);
}

TEST(ScalarTheorem, FeasibilityFlipsAtThreshold) {
  const double thr = 1.0 + std::pow(2.0, 1.05);
  const double eta = std::pow(2.0, 0.1) - 1.0;
  EXPECT_TRUE(check_scalar_theorem({1, 2, 2.1, thr + 1e-6}, 1, 0, eta, Norm::Two).feasible);
  EXPECT_FALSE(check_scalar_theorem({1, 2, 2.1, thr - 1e-6}, 1, 0, eta, Norm::Two).feasible);
  EXPECT_FALSE(check_scalar_theorem({1, 2, 2.0, 5.0}, 1, 0, eta, Norm::Two).feasible);
}

TEST(ScalarTheorem, OptimalEps1Minimizes) {
  const auto o = optimal_eps1(2.0, 2.0 * std::pow(2.0, 0.1));
  for (double e : {0.5, 0.9, 1.2, 2.0}) {
    EXPECT_LE(o.value, 2.0 * e + 2.0 * std::pow(2.0, 0.1) / e);
  }
  EXPECT_NEAR(o.value, 2.0 * o.eps1 + 2.0 * std::pow(2.0, 0.1) / o.eps1, 1e-12);
  EXPECT_THROW(optimal_eps1(0.0, 1.0), std::invalid_argument);
}

TEST(ScalarTheorem, OneAndInfNormForms) {
  const StaticScalarGains g{0.5, 1.0, 3.0, 4.0};
  const auto one = check_scalar_theorem(g, 3, 0.2, 0.5, Norm::One);
  EXPECT_NEAR(one.lhs, 0.2 + (0.5 - 4.0) + 1.0 * 3 * 1.5, 1e-12);
  EXPECT_NEAR(one.epsilon2_max, 3 * (3.0 - 1.0), 1e-12);
  const auto inf = check_scalar_theorem(g, 3, 0.2, 0.5, Norm::Inf);
  EXPECT_NEAR(inf.lhs, 0.2 + (0.5 - 4.0) + 1.0 * 1.5, 1e-12);
  EXPECT_NEAR(inf.epsilon2_max, 2.0, 1e-12);
}

// Delay-free, m = 1: every norm reduces to c4 > c1 + |c2|.
TEST(ScalarTheorem, NormsAgreeWithoutDelay) {
  for (double c4 : {2.5, 2.9, 3.1, 4.0}) {
    const StaticScalarGains g{1.0, 2.0, 2.5, c4};
    const bool two = check_scalar_theorem(g, 1, 0.0, 0.0, Norm::Two).feasible;
    EXPECT_EQ(two, check_scalar_theorem(g, 1, 0.0, 0.0, Norm::One).feasible) << c4;
    EXPECT_EQ(two, check_scalar_theorem(g, 1, 0.0, 0.0, Norm::Inf).feasible) << c4;
    EXPECT_EQ(two, c4 > 3.0) << c4;
  }
}

TEST(ScalarTheorem, CorollaryUsesAsymptotics) {
  const StaticScalarGains g{1.0, 2.0, 2.1, 3.5};
  const auto c = check_corollary(g, 1, DelayProfile::proportional(0.5), RateFunction::power(0.1));
  EXPECT_NEAR(c.linear_gain_threshold, 1.0 + std::pow(2.0, 1.05), 1e-12);
  const auto e = check_corollary(g, 1, DelayProfile::constant(1.0), RateFunction::exponential(0.1));
  const double eta = std::exp(0.1) - 1.0;
  EXPECT_NEAR(e.lhs, 0.1 + 2.0 * (1.0 - 3.5) + 2.0 * 2.0 * std::sqrt(1.0 + eta), 1e-12);
}

TEST(SettlingBound, FeasibleAndInfeasible) {
  const auto r = check_scalar_theorem({1, 2, 2.1, 3.5}, 1, 0, std::pow(2.0, 0.1) - 1.0, Norm::Two);
  EXPECT_NEAR(settling_bound(r, 0.858, 0.9), 0.858 + 1.0 / 0.09, 1e-9);
  const auto bad = check_scalar_theorem({1, 2, 2.1, 1.0}, 1, 0, 0.1, Norm::Two);
  EXPECT_THROW(settling_bound(bad, 1.0), InfeasibleError);
  EXPECT_THROW(settling_bound(r, kNever), std::invalid_argument);
  EXPECT_THROW(adaptive_settling_bound(0.0, 1, 1, {}, 0.0), InfeasibleError);
  EXPECT_NEAR(adaptive_settling_bound(0.5, 1.0, 2.0, {0.1, 0.1, 0.1}, 3.0),
              (1.0 + 1.0 / 0.2 + 4.0 / 0.2) / 0.5 + 3.0, 1e-12);
}

TEST(Spectral, LeftEigenvectorOfReferenceMatrix) {
  const Vector xi = left_eigenvector(example_a());
  EXPECT_NEAR(xi(0), 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(xi(1), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(xi(2), 1.0 / 2.0, 1e-12);
  EXPECT_LT((xi.transpose() * example_a()).norm(), 1e-12);
}

TEST(Spectral, RejectsBadMatrices) {
  Matrix a(2, 2);
  a << -1, 1, 0, 0;
  EXPECT_THROW(left_eigenvector(a), std::invalid_argument);
  a << -1, 2, 1, -1;
  EXPECT_THROW(validate_coupling_matrix(a), std::invalid_argument);
  a << 1, -1, 1, -1;
  EXPECT_THROW(validate_coupling_matrix(a), std::invalid_argument);
  EXPECT_THROW(validate_coupling_matrix(Matrix(2, 3)), std::invalid_argument);
}

TEST(Spectral, PinnedMatrixIsNegativeDefinite) {
  const Matrix a = example_a();
  const Vector xi = left_eigenvector(a);
  for (double sigma : {0.1, 1.0, 10.0}) {
    EXPECT_LT(lambda_max_sym(a, xi, sigma, 0, 0, SpectralKind::Tilde), 0.0) << sigma;
  }
  EXPECT_NEAR(lambda_max_sym(a, xi, 0.0, 0, 0, SpectralKind::Tilde), 0.0, 1e-12);
}

TEST(Spectral, RandomIrreducibleMatrices) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(2, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_coupling(rng, size(rng));
    const Vector xi = left_eigenvector(a);
    EXPECT_NEAR(xi.sum(), 1.0, 1e-12);
    EXPECT_GT(xi.minCoeff(), 0.0);
    EXPECT_LT((xi.transpose() * a).norm(), 1e-10);
    for (double sigma : {0.1, 1.0, 10.0}) {
      EXPECT_LT(lambda_max_sym(a, xi, sigma, 0, 0, SpectralKind::Tilde), 0.0)
          << "trial " << trial << " sigma " << sigma;
    }
  }
}

TEST(NetworkTheorem, SignThresholdAndFeasibility) {
  auto exp = lorenz_preset();
  exp.control.kind = NetworkControlKind::FullNode;
  auto p = network_condition_params(exp, 10.0, 0.0, exp.model.theta1);
  const auto r = check_network_theorem(p, NetworkControlKind::FullNode);
  EXPECT_DOUBLE_EQ(r.sign_gain_threshold, 9.0);
  EXPECT_DOUBLE_EQ(r.epsilon2_max, 1.0);
  EXPECT_FALSE(r.feasible);
  ASSERT_GT(r.linear_gain_threshold, 0.0);

  p.theta4 = r.linear_gain_threshold * (1.0 + 1e-9);
  EXPECT_TRUE(check_network_theorem(p, NetworkControlKind::FullNode).feasible);
  p.theta4 = r.linear_gain_threshold * (1.0 - 1e-6);
  EXPECT_FALSE(check_network_theorem(p, NetworkControlKind::FullNode).feasible);
  p.theta3 = 9.0;
  p.theta4 = 2.0 * r.linear_gain_threshold;
  EXPECT_FALSE(check_network_theorem(p, NetworkControlKind::FullNode).feasible);
}

TEST(NetworkTheorem, LhsMatchesHandAssembly) {
  auto exp = lorenz_preset();
  exp.control.kind = NetworkControlKind::FullNode;
  const auto p = network_condition_params(exp, 10.0, 50.0, 0.1);
  const auto r = check_network_theorem(p, NetworkControlKind::FullNode);
  const double eta = std::pow(2.0, 0.1) - 1.0;
  const double a = 1.0 * 1.0 * 3.0;
  const double b = 1.0 * 1.0 * 27.0 * 9.0 * (1.0 + eta) / (1.0 / 6.0);
  const Matrix xi_m = p.xi.asDiagonal();
  const Matrix m = xi_m * (0.1 * example_a() - 50.0 * Matrix::Identity(3, 3));
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const double expected = 2.0 * p.lipschitz_f + 2.0 * std::sqrt(a * b) + 2.0 * es.eigenvalues().maxCoeff();
  EXPECT_NEAR(r.lhs, expected, 1e-9 * std::abs(expected));
  EXPECT_NEAR(r.eps1_optimal, std::sqrt(b / a), 1e-12);
}

TEST(NetworkTheorem, PinningThresholdScalesTheta1) {
  auto exp = lorenz_preset();
  exp.control.kind = NetworkControlKind::Pinning;
  auto p = network_condition_params(exp, 10.0, 0.0, 1.0);
  const auto r = check_network_theorem(p, NetworkControlKind::Pinning);
  p.theta1 = r.linear_gain_threshold * 1.001;
  EXPECT_LT(check_network_theorem(p, NetworkControlKind::Pinning).lhs, 0.0);
  p.theta1 = r.linear_gain_threshold * 0.999;
  EXPECT_GT(check_network_theorem(p, NetworkControlKind::Pinning).lhs, 0.0);
  EXPECT_THROW(check_network_theorem(p, NetworkControlKind::None), std::invalid_argument);
}

TEST(Lipschitz, BoxConstantBoundsSampledEstimate) {
  const double exact = lorenz_lipschitz_on_box(kLorenzBoxLower, kLorenzBoxUpper);
  const double sampled = estimate_lipschitz(
      [](std::span<const double> x, std::span<double> out) { lorenz(x, out); }, kLorenzBoxLower,
      kLorenzBoxUpper, 20000, 3);
  EXPECT_GE(exact, sampled);
  EXPECT_GT(sampled, 0.5 * exact);
  const double lin = estimate_lipschitz(
      [](std::span<const double> x, std::span<double> out) { sin_plus_linear(x, out); },
      std::vector<double>{-5, -5, -5}, std::vector<double>{5, 5, 5});
  EXPECT_LE(lin, 3.0 + 1e-9);
  EXPECT_GT(lin, 2.5);
}
