#pragma once

#include <cstddef>
#include <vector>

namespace rmpc {

enum class WeightBackend { kCem, kMppi };

struct WeightConfig {
  WeightBackend backend = WeightBackend::kMppi;
  double lambda = 0.01;      // CEM elite fraction
  double temperature = 1.0;  // MPPI temperature
  double beta = 1.0;         // negative ratio

  /// Throws std::invalid_argument unless lambda in (0,1), T > 0, beta in [0,1].
  void validate() const;
};

using CostVector = std::vector<double>;
using WeightVector = std::vector<double>;
/// Signed log-optimality ln H per candidate.
using SignedWeightVector = std::vector<double>;

/// Nonnegative optimality weights summing to N (CEM indicator or MPPI
/// exponential).
WeightVector forward_weights(const CostVector& costs, const WeightConfig& config);

/// ln H = w_1(J) - w_beta(-J): the forward weights minus the backend applied
/// to negated costs with total beta*N. Sums to (1 - beta) * N.
SignedWeightVector signed_log_weights(const CostVector& costs, const WeightConfig& config);

struct Clusters {
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
};

/// Splits candidate indices by the sign of ln H; zeros belong to neither.
Clusters partition_clusters(const SignedWeightVector& log_weights);

}  // namespace rmpc
