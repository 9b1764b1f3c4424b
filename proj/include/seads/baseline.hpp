#pragma once

// Flat (non-hierarchical) SAC on the full environment state with a sparse
// task reward.

#include <cstdint>
#include <functional>
#include <iosfwd>

#include "seads/config.hpp"
#include "seads/evaluation.hpp"
#include "seads/sac.hpp"

namespace seads {

struct FlatEpisode {
  bool solved = false;
  int steps = 0;
};

/// Runs one task episode for at most `step_limit` steps; reward 1 on the
/// transition that reaches the goal, 0 otherwise. Transitions go to `buffer`
/// when non-null. A board that is already solved succeeds with zero steps.
FlatEpisode run_flat_episode(const EnvConfig& env, const sac::SacAgent& agent, const EnvState& start,
                             int step_limit, sac::ActMode mode, Rng& rng, sac::TransitionBuffer* buffer);

struct BaselineMetrics {
  std::int64_t episodes = 0;
  std::int64_t env_steps = 0;
  std::int64_t updates = 0;
  double success_rate = 0.0;  // over episodes since the previous row
  double actor_loss = 0.0;
  double critic_loss = 0.0;
};

inline constexpr const char* kBaselineCsvHeader = "episodes,env_steps,updates,success_rate,actor_loss,critic_loss";
std::string baseline_csv_row(const BaselineMetrics& m);

class FlatSacTrainer {
 public:
  explicit FlatSacTrainer(const RunConfig& config);

  /// Trains until the baseline step budget is reached; `on_log` every
  /// log_every_episodes episodes and once at the end.
  void train(const std::function<void(const BaselineMetrics&)>& on_log = {});

  const sac::SacAgent& agent() const { return agent_; }
  std::int64_t env_steps() const { return env_steps_; }

 private:
  RunConfig config_;
  EnvConfig env_;
  sac::SacAgent agent_;
  sac::TransitionBuffer buffer_;
  Rng update_rng_;
  std::int64_t env_steps_ = 0;
  std::int64_t episodes_ = 0;
  std::int64_t updates_ = 0;
};

/// Same tasks as eval_success, executed by the flat policy (deterministic
/// actions, step limit factor * depth) instead of planning.
EvalReport eval_flat(const EnvConfig& env, const sac::SacAgent& agent, int step_limit_factor, int tasks_per_depth,
                     std::uint64_t seed, int max_depth = 5);

}  // namespace seads
