#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

#include "rmpc/gaussian_policy.hpp"

namespace rmpc::testing {

// Generators for property tests. Each draws from a std::mt19937_64 owned by
// the test, independent of the library's counter streams.

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

inline PolicyParams random_params(std::mt19937_64& rng, Eigen::Index a, Eigen::Index h, double sigma_lo = 0.1,
                                  double sigma_hi = 10.0, double mu_range = 5.0) {
  PolicyParams p = PolicyParams::standard(a, h);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    p.mu.data()[i] = uniform(rng, -mu_range, mu_range);
    p.sigma.data()[i] = log_uniform(rng, sigma_lo, sigma_hi);
  }
  return p;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace rmpc::testing
