#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rmpc/gaussian_policy.hpp"
#include "support.hpp"

using namespace rmpc;
using rmpc::testing::random_params;
using rmpc::testing::rel_err;

namespace {

PolicyParams scalar_params(double mu, double sigma) {
  return PolicyParams(Eigen::MatrixXd::Constant(1, 1, mu), Eigen::MatrixXd::Constant(1, 1, sigma));
}

}  // namespace

TEST(PolicyParams, StandardPrior) {
  const auto p = PolicyParams::standard(2, 5);
  EXPECT_EQ(p.action_dim(), 2);
  EXPECT_EQ(p.horizon(), 5);
  EXPECT_TRUE(p.mu.isZero());
  EXPECT_TRUE((p.sigma.array() == 1.0).all());
  EXPECT_NO_THROW(p.validate());
}

TEST(PolicyParams, ValidateRejectsBadInput) {
  auto p = PolicyParams::standard(1, 3);
  p.sigma(0, 1) = 1e-9;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.floor_sigma(kDefaultSigmaFloor);
  EXPECT_EQ(p.sigma(0, 1), kDefaultSigmaFloor);
  EXPECT_NO_THROW(p.validate());
  p.mu(0, 0) = std::nan("");
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_THROW(PolicyParams(Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Ones(2, 1)).validate(),
               std::invalid_argument);
}

TEST(Squash, MidpointSaturationAndClosedForm) {
  const auto b = ActionBounds::symmetric(1, 1.0);
  EXPECT_EQ(squash(Eigen::MatrixXd::Zero(1, 1), b)(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(squash(Eigen::MatrixXd::Constant(1, 1, 1.0), b)(0, 0), std::tanh(1.0));
  EXPECT_DOUBLE_EQ(squash(Eigen::MatrixXd::Constant(1, 1, 40.0), b)(0, 0), 1.0);

  ActionBounds skew{Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Constant(1, 6.0)};
  EXPECT_DOUBLE_EQ(squash(Eigen::MatrixXd::Zero(1, 1), skew)(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(squash(Eigen::MatrixXd::Constant(1, 1, 0.5), skew)(0, 0), 4.0 + 2.0 * std::tanh(0.5));
  const double lo = squash(Eigen::MatrixXd::Constant(1, 1, -0.7), skew)(0, 0);
  const double hi = squash(Eigen::MatrixXd::Constant(1, 1, 0.7), skew)(0, 0);
  EXPECT_NEAR(lo + hi, 8.0, 1e-12);
}

TEST(Squash, RejectsNonFiniteAndMismatch) {
  const auto b = ActionBounds::symmetric(1, 1.0);
  EXPECT_THROW(squash(Eigen::MatrixXd::Constant(1, 1, INFINITY), b), std::invalid_argument);
  EXPECT_THROW(squash(Eigen::MatrixXd::Zero(2, 1), b), std::invalid_argument);
  ActionBounds inverted{Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -1.0)};
  EXPECT_THROW(inverted.validate(), std::invalid_argument);
}

TEST(Sampling, DeterministicAndIndexAddressable) {
  const auto p = PolicyParams(Eigen::MatrixXd::Constant(2, 3, 0.5), Eigen::MatrixXd::Constant(2, 3, 2.0));
  const StreamKey key{7, 3, 1};
  const auto a = sample_batch(p, 16, key);
  const auto b = sample_batch(p, 16, key);
  ASSERT_EQ(a.size(), 16u);
  for (std::size_t n = 0; n < a.size(); ++n) {
    EXPECT_EQ(a[n], b[n]);
    EXPECT_EQ(a[n], sample_one(p, key, n));
  }
  EXPECT_NE(a[0], sample_batch(p, 1, StreamKey{7, 3, 2})[0]);
  EXPECT_THROW(sample_batch(p, 0, key), std::invalid_argument);
}

TEST(Sampling, MomentsMatchParams) {
  const auto p = scalar_params(1.5, 0.3);
  const auto batch = sample_batch(p, 20000, StreamKey{1, 0, 0});
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& u : batch) {
    sum += u(0, 0);
    sq += u(0, 0) * u(0, 0);
  }
  const double mean = sum / batch.size();
  const double var = sq / batch.size() - mean * mean;
  EXPECT_NEAR(mean, 1.5, 4.0 * 0.3 / std::sqrt(20000.0));
  EXPECT_NEAR(std::sqrt(var), 0.3, 0.01);
}

TEST(LogDensity, StandardNormalAtZero) {
  EXPECT_NEAR(log_density(PolicyParams::standard(1, 1), Eigen::MatrixXd::Zero(1, 1)), -0.918938533204673, 1e-12);
  EXPECT_NEAR(log_density(PolicyParams::standard(2, 3), Eigen::MatrixXd::Zero(2, 3)), 6 * -0.918938533204673,
              1e-12);
}

TEST(LogDensity, ModeAndScaling) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_params(rng, 2, 4);
    const double at_mode = log_density(p, p.mu);
    Eigen::MatrixXd off = p.mu;
    off(1, 2) += 0.1 * p.sigma(1, 2);
    EXPECT_LT(log_density(p, off), at_mode);

    PolicyParams wide = p;
    wide.sigma *= 2.0;
    EXPECT_NEAR(at_mode - log_density(wide, p.mu), 8 * std::numbers::ln2, 1e-9);
  }
}

TEST(LogDensity, LargeDimensionDoesNotUnderflow) {
  const auto p = PolicyParams::standard(10, 200);
  Eigen::MatrixXd u = Eigen::MatrixXd::Constant(10, 200, 3.0);
  const double ld = log_density(p, u);
  EXPECT_TRUE(std::isfinite(ld));
  EXPECT_NEAR(ld, 2000 * (-0.918938533204673 - 4.5), 1e-8);
}

TEST(Kl, HandValues) {
  EXPECT_EQ(kl_divergence(scalar_params(0.3, 1.7), scalar_params(0.3, 1.7)), 0.0);
  EXPECT_NEAR(kl_divergence(scalar_params(1.0, 1.0), scalar_params(0.0, 1.0)), 0.5, 1e-15);
  EXPECT_NEAR(kl_divergence(scalar_params(0.5, 2.0), scalar_params(0.0, 1.0)),
              0.5 * (std::log(0.25) + 4.0 + 0.25 - 1.0), 1e-15);
  EXPECT_NEAR(kl_divergence(scalar_params(0.5, 2.0), scalar_params(0.0, 1.0)), 0.93185, 1e-5);
}

TEST(Kl, NonNegativeAndZeroOnlyAtEquality) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto a = random_params(rng, 2, 3);
    const auto b = random_params(rng, 2, 3);
    EXPECT_GT(kl_divergence(a, b), 0.0);
    EXPECT_EQ(kl_divergence(a, a), 0.0);
  }
}

TEST(MirrorMap, HandValues) {
  auto theta = scalar_params(3.0, 1.0);
  auto ref = scalar_params(0.0, 2.0);
  EXPECT_DOUBLE_EQ(mirror_map(theta, ref).z_mu(0, 0), 0.75);

  const auto unit = mirror_map(scalar_params(-1.25, 0.4), scalar_params(9.0, 1.0));
  EXPECT_DOUBLE_EQ(unit.z_mu(0, 0), -1.25);

  const auto self = mirror_map(ref, ref);
  EXPECT_DOUBLE_EQ(self.z_sigma(0, 0), 0.0);
}

TEST(MirrorInverse, HandValues) {
  MirrorPoint z{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1), scalar_params(0.0, 1.7)};
  EXPECT_DOUBLE_EQ(mirror_inverse(z).sigma(0, 0), 1.7);

  z.reference = scalar_params(0.0, 2.0);
  z.z_sigma(0, 0) = 0.25;
  const auto back = mirror_inverse(z);
  EXPECT_NEAR(back.sigma(0, 0), 0.5 * (1.0 + 2.0 * std::sqrt(4.25)), 1e-14);
  EXPECT_NEAR(back.sigma(0, 0), 2.56155, 1e-5);
  EXPECT_NEAR(mirror_map(back, z.reference).z_sigma(0, 0), 0.25, 1e-14);
}

TEST(MirrorInverse, RoundTripBothDirections) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto theta = random_params(rng, 2, 3);
    const auto ref = random_params(rng, 2, 3);
    const auto back = mirror_inverse(mirror_map(theta, ref));
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      ASSERT_LE(rel_err(back.mu.data()[k], theta.mu.data()[k]), 1e-9);
      ASSERT_LE(std::abs(back.sigma.data()[k] / theta.sigma.data()[k] - 1.0), 1e-9);
    }

    MirrorPoint z{Eigen::MatrixXd(2, 3), Eigen::MatrixXd(2, 3), ref};
    for (Eigen::Index k = 0; k < 6; ++k) {
      z.z_mu.data()[k] = rmpc::testing::uniform(rng, -50, 50);
      z.z_sigma.data()[k] = rmpc::testing::uniform(rng, -50, 50);
    }
    const auto again = mirror_map(mirror_inverse(z), ref);
    for (Eigen::Index k = 0; k < 6; ++k) {
      ASSERT_LE(rel_err(again.z_mu.data()[k], z.z_mu.data()[k]), 1e-9);
      ASSERT_LE(rel_err(again.z_sigma.data()[k], z.z_sigma.data()[k]), 1e-9);
    }
  }
}

TEST(MirrorInverse, SigmaPositiveForExtremeInput) {
  const auto ref = scalar_params(0.0, 3.0);
  for (double zs : {-1e300, -1e12, -1e7, -1.0, 0.0, 1.0, 1e7, 1e12, 1e300}) {
    MirrorPoint z{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Constant(1, 1, zs), ref};
    const double s = mirror_inverse(z).sigma(0, 0);
    EXPECT_GT(s, 0.0) << zs;
    EXPECT_TRUE(std::isfinite(s)) << zs;
  }
}

TEST(MirrorMap, MatchesFiniteDifferenceOfKl) {
  // d KL / d theta = psi(theta) - psi(theta_i); the second term is constant in theta.
  std::mt19937_64 rng(9);
  const double h = 1e-5;
  for (int trial = 0; trial < 200; ++trial) {
    const auto theta = random_params(rng, 1, 3, 0.3, 3.0, 2.0);
    const auto ref = random_params(rng, 1, 3, 0.3, 3.0, 2.0);
    const auto z = mirror_map(theta, ref);
    const auto z_ref = mirror_map(ref, ref);
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      auto up = theta;
      auto dn = theta;
      up.mu.data()[k] += h;
      dn.mu.data()[k] -= h;
      const double fd_mu = (kl_divergence(up, ref) - kl_divergence(dn, ref)) / (2 * h);
      EXPECT_LE(rel_err(fd_mu, z.z_mu.data()[k] - z_ref.z_mu.data()[k]), 1e-6);

      up = theta;
      dn = theta;
      up.sigma.data()[k] += h;
      dn.sigma.data()[k] -= h;
      const double fd_sigma = (kl_divergence(up, ref) - kl_divergence(dn, ref)) / (2 * h);
      EXPECT_LE(rel_err(fd_sigma, z.z_sigma.data()[k] - z_ref.z_sigma.data()[k]), 1e-6);
    }
  }
}
