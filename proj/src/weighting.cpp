#include "rmpc/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rmpc {

namespace {

void require_costs(const CostVector& costs) {
  if (costs.empty()) throw std::invalid_argument("weights: need at least one candidate");
  for (double j : costs) {
    if (!std::isfinite(j)) throw std::invalid_argument("weights: non-finite cost");
  }
}

// Number of elites for a quantile fraction. The small slack keeps products
// such as 0.07 * 100 from rounding up to an extra elite.
std::size_t elite_count(double fraction, std::size_t n) {
  const double raw = fraction * static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
}

// Indicator of the `fraction`-quantile lowest costs, each elite receiving
// total / k. Ties at the threshold go to the lower index.
WeightVector cem_weights(const CostVector& costs, double fraction, double total) {
  const std::size_t n = costs.size();
  WeightVector w(n, 0.0);
  if (total == 0.0) return w;
  const std::size_t k = elite_count(fraction, n);
  if (k < 1) throw std::invalid_argument("quantile selects no candidate");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
  const double each = total / static_cast<double>(k);
  for (std::size_t r = 0; r < std::min(k, n); ++r) w[order[r]] = each;
  return w;
}

WeightVector mppi_weights(const CostVector& costs, double temperature, double total) {
  const std::size_t n = costs.size();
  WeightVector w(n, 0.0);
  if (total == 0.0) return w;
  const double lowest = *std::min_element(costs.begin(), costs.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(-(costs[i] - lowest) / temperature);
    sum += w[i];
  }
  const double scale = total / sum;
  for (double& x : w) x *= scale;
  return w;
}

}  // namespace

void WeightConfig::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
}

WeightVector forward_weights(const CostVector& costs, const WeightConfig& config) {
  config.validate();
  require_costs(costs);
  const double n = static_cast<double>(costs.size());
  if (config.backend == WeightBackend::kCem) return cem_weights(costs, config.lambda, n);
  return mppi_weights(costs, config.temperature, n);
}

SignedWeightVector signed_log_weights(const CostVector& costs, const WeightConfig& config) {
  const WeightVector positive = forward_weights(costs, config);
  const double n = static_cast<double>(costs.size());

  CostVector negated(costs.size());
  std::transform(costs.begin(), costs.end(), negated.begin(), [](double j) { return -j; });
  const double total = config.beta * n;
  const WeightVector negative = config.backend == WeightBackend::kCem
                                    ? cem_weights(negated, config.beta * config.lambda, total)
                                    : mppi_weights(negated, config.temperature, total);

  SignedWeightVector out(costs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = positive[i] - negative[i];
  return out;
}

Clusters partition_clusters(const SignedWeightVector& log_weights) {
  Clusters c;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    if (log_weights[i] > 0.0) {
      c.positive.push_back(i);
    } else if (log_weights[i] < 0.0) {
      c.negative.push_back(i);
    }
  }
  return c;
}

}  // namespace rmpc
