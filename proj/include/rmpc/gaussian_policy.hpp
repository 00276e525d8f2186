#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "rmpc/random.hpp"

namespace rmpc {

/// Default lower bound on every standard deviation after an update.
inline constexpr double kDefaultSigmaFloor = 1e-6;

/// Diagonal Gaussian over an action-dimension x horizon grid. Both matrices
/// live in pre-squash space; rows are action dimensions, columns time steps.
struct PolicyParams {
  Eigen::MatrixXd mu;
  Eigen::MatrixXd sigma;

  PolicyParams() = default;
  PolicyParams(Eigen::MatrixXd mean, Eigen::MatrixXd scale);

  /// The (0, I) prior. The unit scale refers to pre-squash space.
  static PolicyParams standard(Eigen::Index action_dim, Eigen::Index horizon);

  Eigen::Index action_dim() const { return mu.rows(); }
  Eigen::Index horizon() const { return mu.cols(); }
  Eigen::Index size() const { return mu.size(); }

  /// Throws std::invalid_argument if shapes mismatch, any entry is
  /// non-finite, or a sigma entry is below `sigma_floor`.
  void validate(double sigma_floor = kDefaultSigmaFloor) const;

  /// Clamps every sigma entry to at least `sigma_floor`.
  void floor_sigma(double sigma_floor);

  bool operator==(const PolicyParams& other) const {
    return mu == other.mu && sigma == other.sigma;
  }
};

/// Image of a PolicyParams under the mirror map anchored at `reference`.
struct MirrorPoint {
  Eigen::MatrixXd z_mu;
  Eigen::MatrixXd z_sigma;
  PolicyParams reference;
};

/// Raw (pre-squash) action sequence, A x H.
using ActionSequence = Eigen::MatrixXd;

/// Per-dimension closed action interval.
struct ActionBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static ActionBounds symmetric(Eigen::Index dim, double limit);
  Eigen::Index dim() const { return lower.size(); }
  void validate() const;
};

/// Draws `count` sequences mu + sigma * eps. Candidate n uses its own stream
/// derived from (key, n).
std::vector<ActionSequence> sample_batch(const PolicyParams& params, std::size_t count,
                                         const StreamKey& key);

/// Single candidate of a batch; sample_batch(params, k, key)[n] == sample_one(params, key, n).
ActionSequence sample_one(const PolicyParams& params, const StreamKey& key, std::size_t index);

/// Affine tanh map of each row onto [lower, upper]: midpoint + half_range * tanh(u).
Eigen::MatrixXd squash(const Eigen::MatrixXd& u_raw, const ActionBounds& bounds);

/// Joint log-density of U under the diagonal Gaussian, summed per entry.
double log_density(const PolicyParams& params, const ActionSequence& u);

/// KL(pi(.; theta) || pi(.; theta_i)) in closed form.
double kl_divergence(const PolicyParams& theta, const PolicyParams& theta_i);

/// z = psi(theta) with psi the derivative of KL(. || pi(.; theta_i)):
///   z_mu = mu / sigma_i^2,   z_sigma = sigma / sigma_i^2 - 1 / sigma.
MirrorPoint mirror_map(const PolicyParams& theta, const PolicyParams& theta_i);

/// Inverse of mirror_map for the same reference. Total for finite input; the
/// returned sigma is positive but is not floored.
PolicyParams mirror_inverse(const MirrorPoint& z);

}  // namespace rmpc
