#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "rmpc/gaussian_policy.hpp"

namespace rmpc {

/// Dynamics, costs and constraint of one control task. All callables must
/// be pure: rollouts run concurrently over candidates.
struct EnvSpec {
  std::string name;
  Eigen::Index state_dim = 0;
  Eigen::Index action_dim = 0;
  ActionBounds bounds;
  double dt = 0.1;
  Eigen::VectorXd initial_state;

  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> dynamics;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> stage_cost;
  std::function<double(const Eigen::VectorXd&)> terminal_cost;
  /// c(x, u) <= 0 is feasible; positive values are charged penalty * c.
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> constraint;
  double constraint_penalty = 1e3;
};

struct RolloutResult {
  double cost = 0.0;
  std::vector<Eigen::VectorXd> states;  // H + 1 entries, starting at x_t
  int violations = 0;
  bool non_finite = false;
};

/// J = phi(x_H) + sum_t [L(x_t, u_t) + penalty * max(0, c(x_t, u_t))] with
/// u = squash(U). A non-finite state or cost yields J = penalty * (H + 1).
RolloutResult rollout_cost(const EnvSpec& env, const Eigen::VectorXd& x0, const ActionSequence& u_raw);

/// Cost only, without recording visited states.
double rollout_cost_only(const EnvSpec& env, const Eigen::VectorXd& x0, const ActionSequence& u_raw);

/// Realized one-step transition used by the episode loop: stage cost
/// (including constraint penalty) of applying the squashed action `u`.
double realized_stage_cost(const EnvSpec& env, const Eigen::VectorXd& x, const Eigen::VectorXd& u);

// Built-in desk-scale tasks. --------------------------------------------

/// Static 1-D quadratic L = weight * (u - target)^2; the state never changes.
/// `target` is in squashed action units and must lie inside (-limit, limit).
struct QuadraticParams {
  double limit = 1.0;
  double target = 0.5;
  double weight = 10.0;
};
EnvSpec make_quadratic(const QuadraticParams& p = {});

/// 2-D point mass (position, velocity) driven to a goal.
EnvSpec make_point_reacher();

/// Static 1-D cost with two quadratic valleys of different depth:
///   L(u) = curvature * min((u - left)^2, (u - right)^2 + depth_gap).
/// The global minimum is at `left` with value 0; `right` is a local one
/// with value curvature * depth_gap.
struct BimodalParams {
  double limit = 2.0;
  double left = -1.0;
  double right = 1.0;
  double depth_gap = 0.05;
  double curvature = 4.0;
};
EnvSpec make_bimodal_valley(const BimodalParams& p = {});

/// 1-D single integrator x' = x + dt * speed * u moving toward a goal that
/// sits right next to a catastrophic band (the trap).
struct TrapParams {
  double goal = 1.0;
  double trap_begin = 1.05;  // trap occupies [trap_begin, trap_end]
  double trap_end = 1.6;
  double trap_cost = 20.0;   // per step spent inside the trap
  double speed = 2.0;
  double margin = 10.0;      // guaranteed excess of the trap over the goal region
};
EnvSpec make_trap_corridor(const TrapParams& p = {});
bool in_trap(const TrapParams& p, double position);

/// Static action cost with penalty bands on both sides of the goal, so the
/// density model of bad candidates centres on the good region.
struct OverlapParams {
  double goal = 0.0;
  double band_offset = 0.15;  // bands start this far from the goal
  double band_width = 0.5;
  double band_cost = 10.0;
  double weight = 10.0;
};
bool in_band(const OverlapParams& p, double action);
EnvSpec make_overlap_trap(const OverlapParams& p = {});

/// Torque-limited pendulum; angle measured from upright, starts hanging.
struct PendulumParams {
  double gravity = 9.81;
  double length = 1.0;
  double mass = 1.0;
  double damping = 0.0;
  double max_torque = 3.0;
  int substeps = 4;
};
EnvSpec make_pendulum_swingup(const PendulumParams& p = {});
double pendulum_energy(const PendulumParams& p, const Eigen::VectorXd& x);

/// Registry lookup by name; throws std::invalid_argument listing known names.
EnvSpec make_env(const std::string& name);
std::vector<std::string> env_names();

}  // namespace rmpc
