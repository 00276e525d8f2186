#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "rmpc/solvers.hpp"

namespace rmpc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Evaluates every candidate into its own slot so that the result does not
// depend on scheduling.
class RolloutEvaluator {
 public:
  RolloutEvaluator(const EnvSpec& env, int threads) : env_(env) {
    if (threads > 1) arena_ = std::make_unique<tbb::task_arena>(threads);
  }

  std::vector<RolloutResult> operator()(const Eigen::VectorXd& x, const std::vector<ActionSequence>& seqs) {
    std::vector<RolloutResult> out(seqs.size());
    if (!arena_) {
      for (std::size_t n = 0; n < seqs.size(); ++n) out[n] = rollout_cost(env_, x, seqs[n]);
      return out;
    }
    arena_->execute([&] {
      tbb::parallel_for(tbb::blocked_range<std::size_t>(0, seqs.size()), [&](const auto& range) {
        for (std::size_t n = range.begin(); n != range.end(); ++n) out[n] = rollout_cost(env_, x, seqs[n]);
      });
    });
    return out;
  }

 private:
  const EnvSpec& env_;
  std::unique_ptr<tbb::task_arena> arena_;
};

SolverState initial_state(const SolverState* prev, const SolverConfig& config, Eigen::Index action_dim) {
  const PolicyParams prior = PolicyParams::standard(action_dim, config.horizon);
  const bool warm = prev != nullptr && prev->plus.mu.rows() == action_dim &&
                    prev->plus.mu.cols() == config.horizon;
  const double a_prv = warm ? prev->a : config.alpha;

  SolverState s;
  const WarmStart plus = warm_start(warm ? prev->plus : prior, prior, a_prv, config.eta, config.alpha);
  const WarmStart minus = warm_start(warm ? prev->minus : prior, prior, a_prv, config.eta, config.alpha);
  s.plus = plus.theta;
  s.minus = minus.theta;
  s.plus.floor_sigma(config.sigma_floor);
  s.minus.floor_sigma(config.sigma_floor);
  s.tilde_plus = s.plus;
  s.tilde_minus = s.minus;
  s.a = plus.a;
  s.A = plus.A;
  s.sigma_max = 0.0;
  s.iteration = 0;
  s.step = prev != nullptr ? prev->step + 1 : 0;
  return s;
}

}  // namespace

SolveOutput solve(const EnvSpec& env, const Eigen::VectorXd& x, const SolverState* prev,
                  const SolverConfig& config, const IterationObserver& observer) {
  config.validate();
  if (x.size() != env.state_dim) throw std::invalid_argument("solve: state dimension mismatch");
  if (env.bounds.dim() != env.action_dim) throw std::invalid_argument("solve: bounds dimension mismatch");

  const auto start = Clock::now();
  SolveOutput out;
  SolverState& state = out.state;
  ControlResult& result = out.result;
  state = initial_state(prev, config, env.action_dim);

  RolloutEvaluator evaluate(env, config.threads);
  const bool decomposed = config.variant == SolverVariant::kReject || config.variant == SolverVariant::kAccel;
  bool any_positive_update = false;
  double iteration_time_sum = 0.0;

  for (int i = 1; i <= config.max_iterations; ++i) {
    if (i > 1) {
      const double mean_iteration = iteration_time_sum / static_cast<double>(i - 1);
      if (seconds_since(start) + mean_iteration > config.deadline) break;
    }
    const auto iteration_start = Clock::now();
    const StreamKey key{config.seed, state.step, static_cast<std::uint64_t>(i)};

    CandidateBatch batch;
    batch.sequences = decomposed ? compose_and_sample(state.plus, state.minus, config.oversample,
                                                      config.candidates, config.kappa, key)
                                 : sample_batch(state.plus, config.candidates, key);

    const std::vector<RolloutResult> rollouts = evaluate(x, batch.sequences);
    batch.costs.resize(rollouts.size());
    double worst_finite = -std::numeric_limits<double>::infinity();
    for (const auto& r : rollouts) {
      if (!r.non_finite) worst_finite = std::max(worst_finite, r.cost);
    }
    if (!std::isfinite(worst_finite)) worst_finite = 0.0;
    for (std::size_t n = 0; n < rollouts.size(); ++n) {
      if (rollouts[n].non_finite) {
        batch.costs[n] = worst_finite + config.nonfinite_penalty;
        ++result.nonfinite_costs;
      } else {
        batch.costs[n] = rollouts[n].cost;
      }
      result.best_cost = std::min(result.best_cost, batch.costs[n]);
    }

    double noise = 0.0;
    switch (config.variant) {
      case SolverVariant::kForward: {
        const WeightVector w = forward_weights(batch.costs, config.weights);
        batch.log_weights = w;
        UpdateOutcome up = forward_update(state.plus, batch.sequences, w, config.alpha, config.sigma_floor);
        if (up.skipped) {
          ++result.zero_weight_iterations;
        } else {
          any_positive_update = true;
        }
        state.plus = std::move(up.params);
        break;
      }
      case SolverVariant::kReverse: {
        batch.log_weights = signed_log_weights(batch.costs, config.weights);
        UpdateOutcome up = reverse_update(state.plus, batch, config.alpha, config.sigma_floor);
        any_positive_update = any_positive_update || !up.skipped;
        state.plus = std::move(up.params);
        break;
      }
      case SolverVariant::kReject: {
        batch.log_weights = signed_log_weights(batch.costs, config.weights);
        RejectOutcome up = reject_update(state, batch, config.alpha, config.sigma_floor);
        any_positive_update = any_positive_update || up.plus_updated;
        result.negative_updates += up.minus_updated ? 1 : 0;
        state = std::move(up.state);
        break;
      }
      case SolverVariant::kAccel: {
        batch.log_weights = signed_log_weights(batch.costs, config.weights);
        AccelOutcome up = accel_update(state, batch, config);
        any_positive_update = any_positive_update || up.plus_updated;
        result.negative_updates += up.minus_updated ? 1 : 0;
        noise = up.noise.s;
        state = std::move(up.state);
        break;
      }
    }
    state.iteration = i;
    result.iterations = i;
    result.final_noise = noise;

    const double elapsed = std::chrono::duration<double>(Clock::now() - iteration_start).count();
    iteration_time_sum += elapsed;
    result.max_iteration_time = std::max(result.max_iteration_time, elapsed);
    if (observer) observer(IterationTrace{i, &state, &batch, noise});
  }

  result.positive_cluster_empty = !any_positive_update;
  result.final_step = state.a;
  result.u = squash(state.plus.mu.col(0), env.bounds).col(0);
  result.wall_time = seconds_since(start);
  return out;
}

}  // namespace rmpc
