#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rmpc/weighting.hpp"
#include "support.hpp"

using namespace rmpc;

namespace {

WeightConfig cem(double lambda, double beta = 1.0) {
  WeightConfig c;
  c.backend = WeightBackend::kCem;
  c.lambda = lambda;
  c.beta = beta;
  return c;
}

WeightConfig mppi(double temperature, double beta = 1.0) {
  WeightConfig c;
  c.backend = WeightBackend::kMppi;
  c.temperature = temperature;
  c.beta = beta;
  return c;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Sort-based nearest-rank elite oracle: stable sort by cost, first k win.
std::vector<double> cem_oracle(const CostVector& j, double fraction, double total) {
  const std::size_t n = j.size();
  const double raw = fraction * n;
  const auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return j[a] < j[b]; });
  std::vector<double> w(n, 0.0);
  for (std::size_t r = 0; r < k; ++r) w[order[r]] = total / k;
  return w;
}

CostVector random_costs(std::mt19937_64& rng, std::size_t n) {
  CostVector j(n);
  const double scale = rmpc::testing::log_uniform(rng, 1e-2, 1e3);
  for (auto& v : j) v = scale * rmpc::testing::uniform(rng, -1.0, 1.0);
  return j;
}

}  // namespace

TEST(WeightConfig, Validation) {
  EXPECT_NO_THROW(WeightConfig{}.validate());
  EXPECT_THROW(cem(0.0).validate(), std::invalid_argument);
  EXPECT_THROW(cem(1.0).validate(), std::invalid_argument);
  EXPECT_THROW(mppi(0.0).validate(), std::invalid_argument);
  EXPECT_THROW(mppi(1.0, 1.5).validate(), std::invalid_argument);
  EXPECT_THROW(mppi(1.0, -0.1).validate(), std::invalid_argument);
}

TEST(ForwardWeights, MppiEqualCostsAreUniform) {
  const auto w = forward_weights(CostVector(7, 3.25), mppi(0.7));
  for (double v : w) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(ForwardWeights, MppiTwoCandidates) {
  const auto w = forward_weights({0.0, 2.0 * std::log(3.0)}, mppi(2.0));
  EXPECT_NEAR(w[0], 1.5, 1e-14);
  EXPECT_NEAR(w[1], 0.5, 1e-14);
}

TEST(ForwardWeights, CemUniqueMinimumGetsEverything) {
  CostVector j(100);
  for (std::size_t n = 0; n < j.size(); ++n) j[n] = std::sin(static_cast<double>(n)) + 2.0;
  j[37] = -5.0;
  const auto w = forward_weights(j, cem(0.01));
  for (std::size_t n = 0; n < j.size(); ++n) EXPECT_EQ(w[n], n == 37 ? 100.0 : 0.0);
}

TEST(ForwardWeights, CemTiesGoToLowerIndex) {
  const auto w = forward_weights({1.0, 0.0, 0.0, 0.0}, cem(0.5));
  EXPECT_EQ(w, (std::vector<double>{0.0, 2.0, 2.0, 0.0}));
}

TEST(ForwardWeights, EmptyOrNonFiniteInputIsAnError) {
  EXPECT_THROW(forward_weights({}, cem(0.01)), std::invalid_argument);
  EXPECT_THROW(forward_weights({1.0, NAN}, mppi(1.0)), std::invalid_argument);
  EXPECT_EQ(forward_weights({4.0}, cem(0.01)), std::vector<double>{1.0});
}

TEST(SignedWeights, CemQuantileSelectingNobodyIsAnError) {
  try {
    signed_log_weights(CostVector(10, 0.0), cem(0.01, 1e-12));
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "quantile selects no candidate");
  }
}

TEST(ForwardWeights, MatchesOraclesOnRandomCosts) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    auto j = random_costs(rng, n);
    if (trial % 3 == 0) {
      for (auto& v : j) v = std::round(v);  // plenty of ties
    }
    const double lambda = rmpc::testing::uniform(rng, 0.01, 0.9);
    EXPECT_EQ(forward_weights(j, cem(lambda)), cem_oracle(j, lambda, static_cast<double>(n)));

    const double t = rmpc::testing::log_uniform(rng, 0.1, 100.0);
    const auto w = forward_weights(j, mppi(t));
    const double jmin = *std::min_element(j.begin(), j.end());
    double z = 0.0;
    for (double v : j) z += std::exp(-(v - jmin) / t);
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_NEAR(w[k], n * std::exp(-(j[k] - jmin) / t) / z, 1e-9 * n);
    }
  }
}

TEST(ForwardWeights, SumToNAndShiftInvariant) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 300;
    const auto j = random_costs(rng, n);
    for (const auto& cfg : {cem(0.1), mppi(1.0)}) {
      const auto w = forward_weights(j, cfg);
      EXPECT_NEAR(sum(w), static_cast<double>(n), 1e-9 * n);
      for (double v : w) EXPECT_GE(v, 0.0);

      auto shifted = j;
      const double c = rmpc::testing::uniform(rng, -1e3, 1e3);
      for (auto& v : shifted) v += c;
      const auto ws = forward_weights(shifted, cfg);
      for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(ws[k], w[k], 1e-9 * n);
    }
  }
}

TEST(ForwardWeights, MppiSurvivesHugeCosts) {
  const auto w = forward_weights({1e300, 1e300 + 1e290, -1e300}, mppi(1.0));
  for (double v : w) EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(w[2], 3.0, 1e-12);
}

TEST(SignedWeights, EqualCostsCancel) {
  for (const auto& cfg : {cem(0.25), mppi(1.0)}) {
    const auto l = signed_log_weights(CostVector(8, -2.0), cfg);
    for (double v : l) EXPECT_EQ(v, 0.0);
  }
}

TEST(SignedWeights, BetaZeroIsForward) {
  std::mt19937_64 rng(23);
  const auto j = random_costs(rng, 40);
  for (const auto& cfg : {cem(0.1, 0.0), mppi(1.0, 0.0)}) {
    EXPECT_EQ(signed_log_weights(j, cfg), forward_weights(j, cfg));
  }
}

TEST(SignedWeights, MppiHandCase) {
  const CostVector j{-1.0, 0.0, 1.0};
  const auto l = signed_log_weights(j, mppi(1.0));
  const double z = std::exp(1.0) + 1.0 + std::exp(-1.0);
  const double hi = 3.0 * std::exp(1.0) / z;
  const double lo = 3.0 * std::exp(-1.0) / z;
  EXPECT_NEAR(l[0], hi - lo, 1e-14);
  EXPECT_NEAR(l[1], 0.0, 1e-14);
  EXPECT_NEAR(l[2], lo - hi, 1e-14);
  EXPECT_NEAR(sum(l), 0.0, 1e-14);
}

TEST(SignedWeights, CemNegativeSideUsesTighterQuantile) {
  CostVector j(20);
  std::iota(j.begin(), j.end(), 0.0);
  const auto l = signed_log_weights(j, cem(0.2, 0.5));
  // 4 elites at +5 each; ceil(0.1 * 20) = 2 worst at -5 each (sum beta N = 10).
  for (std::size_t n = 0; n < 20; ++n) {
    const double want = n < 4 ? 5.0 : (n >= 18 ? -5.0 : 0.0);
    EXPECT_DOUBLE_EQ(l[n], want) << n;
  }
}

TEST(SignedWeights, SumIsOneMinusBetaTimesN) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 500;
    const auto j = random_costs(rng, n);
    for (double beta : {0.0, 0.25, 0.5, 1.0}) {
      for (const auto& cfg : {cem(0.1, beta), mppi(1.0, beta)}) {
        EXPECT_NEAR(sum(signed_log_weights(j, cfg)), (1.0 - beta) * n, 1e-9 * n);
      }
    }
  }
}

TEST(SignedWeights, MppiMonotoneInCost) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    const auto j = random_costs(rng, 64);
    const auto l = signed_log_weights(j, mppi(rmpc::testing::log_uniform(rng, 0.1, 10.0)));
    for (std::size_t a = 0; a < j.size(); ++a) {
      for (std::size_t b = 0; b < j.size(); ++b) {
        if (j[a] < j[b]) EXPECT_GE(l[a], l[b]);
      }
    }
  }
}

TEST(Clusters, SignBoundary) {
  const auto c = partition_clusters({0.5, -0.3, 0.0});
  EXPECT_EQ(c.positive, std::vector<std::size_t>{0});
  EXPECT_EQ(c.negative, std::vector<std::size_t>{1});
  EXPECT_TRUE(partition_clusters({1.0, 2.0}).negative.empty());
}

TEST(Clusters, AntisymmetricCostsSplitEvenly) {
  for (const auto& cfg : {cem(0.5), mppi(1.0)}) {
    const auto c = partition_clusters(signed_log_weights({-1.0, 1.0}, cfg));
    EXPECT_EQ(c.positive.size(), 1u);
    EXPECT_EQ(c.negative.size(), 1u);
  }
}

TEST(Clusters, DisjointOnRandomInput) {
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 100; ++trial) {
    const auto l = signed_log_weights(random_costs(rng, 50), trial % 2 ? cem(0.2) : mppi(1.0));
    const auto c = partition_clusters(l);
    for (auto p : c.positive) {
      EXPECT_GT(l[p], 0.0);
      EXPECT_EQ(std::count(c.negative.begin(), c.negative.end(), p), 0);
    }
    for (auto m : c.negative) EXPECT_LT(l[m], 0.0);
  }
}
