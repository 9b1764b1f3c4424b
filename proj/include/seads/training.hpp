#pragma once

// Joint training of skill policies and the skill model: episode buffers,
// intrinsic reward, constrained relabelling and the per-epoch update loop.

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "seads/embedding.hpp"
#include "seads/sac.hpp"
#include "seads/skill_model.hpp"

namespace seads {

struct RewardConfig {
  int num_skills = 25;
  bool second_best_norm = true;
  bool novelty_bonus = true;

  double clip_floor() const;
  void validate() const;
};

/// Reward for skill `skill` given one row of skill scores. `log_likelihood`
/// may be empty when the model has none (novelty bonus then unavailable).
double reward_from_scores(std::span<const double> log_posterior, std::span<const double> log_likelihood, int skill,
                          const RewardConfig& config);
double compute_reward(const SymbolicObs& z0, const SymbolicObs& zT, int skill, const skills::SkillModel& model,
                      const RewardConfig& config);

/// Count-preserving relabelling: over the `eligible` rows, assign skills
/// maximizing the summed log-posterior such that the multiset of skills is
/// unchanged. Ineligible rows keep their label.
std::vector<int> constrained_relabel(const nn::Matrix& log_posterior, std::span<const int> skills,
                                     std::span<const char> eligible);

struct RelabelOutcome {
  std::vector<int> skills;
  std::vector<char> eligible;
};

/// Marks each episode relabelable with probability `fraction` (episodes
/// without a symbolic change never are) and relabels that subset.
RelabelOutcome relabel(std::span<const EpisodeRecord* const> episodes, const nn::Matrix& log_posterior,
                       double fraction, Rng& rng);

using EpisodePtr = std::shared_ptr<const EpisodeRecord>;

/// Long-term and recent FIFO episode stores.
class EpisodeBuffers {
 public:
  EpisodeBuffers(std::size_t long_capacity = 2048, std::size_t recent_capacity = 256);

  void add(EpisodePtr episode);
  const std::deque<EpisodePtr>& long_term() const { return long_; }
  const std::deque<EpisodePtr>& recent() const { return recent_; }
  std::size_t long_capacity() const { return long_capacity_; }
  std::size_t recent_capacity() const { return recent_capacity_; }

  /// min(n, size) long-term episodes without replacement, followed by all
  /// recent episodes.
  std::vector<EpisodePtr> training_set(std::size_t n, Rng& rng) const;

  /// Replaces both stores, oldest first; extra entries beyond capacity are dropped from the front.
  void restore(std::deque<EpisodePtr> long_term, std::deque<EpisodePtr> recent);

 private:
  std::size_t long_capacity_;
  std::size_t recent_capacity_;
  std::deque<EpisodePtr> long_;
  std::deque<EpisodePtr> recent_;
};

struct TrainConfig {
  int episodes_per_epoch = 32;
  std::int64_t env_steps = 500000;
  int long_buffer = 2048;
  int recent_buffer = 256;
  int sample_size = 256;
  double fm_relabel_fraction = 1.0;
  double sac_relabel_fraction = 0.5;
  bool fm_relabel = true;
  bool sac_relabel = true;
  int sac_updates = 16;
  int sac_batch = 128;
  int fm_updates = 4;
  int fm_batch = 32;
  int max_board_depth = 5;

  void validate() const;
};

struct SkillModelConfig {
  bool discriminator = false;  // VIC-style q(k | z0, zT) instead of the forward model
  int hidden = 256;
  double learning_rate = 1e-3;
};

struct SeadsConfig {
  EnvConfig env;
  int num_skills = 25;
  TrainConfig train;
  sac::SacConfig sac;
  RewardConfig reward;
  SkillModelConfig skill_model;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochMetrics {
  std::int64_t epoch = 0;
  std::int64_t env_steps = 0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double fm_nll = 0.0;
  double mean_reward = 0.0;
  double mean_length = 0.0;
  double change_fraction = 0.0;
  std::size_t long_buffer = 0;
  std::size_t recent_buffer = 0;
};

/// SAC agent acting as a skill-conditioned policy: input = observation
/// followed by one-hot(skill).
class SkillAgentPolicy final : public SkillPolicy {
 public:
  SkillAgentPolicy(const sac::SacAgent& agent, int num_skills, sac::ActMode mode)
      : agent_(agent), num_skills_(num_skills), mode_(mode) {}
  Action act(const EnvState& state, int skill, Rng& rng) const override;

 private:
  const sac::SacAgent& agent_;
  int num_skills_;
  sac::ActMode mode_;
};

/// observe(state) followed by one-hot(skill).
std::vector<double> skill_input(const EnvState& state, int skill, int num_skills);

/// SAC transitions of one episode labelled with `skill`; only the final
/// transition carries `final_reward`.
std::vector<sac::Transition> episode_transitions(const EpisodeRecord& episode, int skill, int num_skills,
                                                 double final_reward);

class SeadsTrainer {
 public:
  explicit SeadsTrainer(const SeadsConfig& config);

  const SeadsConfig& config() const { return config_; }
  const sac::SacAgent& agent() const { return agent_; }
  const skills::SkillModel& skill_model() const { return *model_; }
  const EpisodeBuffers& buffers() const { return buffers_; }
  std::int64_t env_steps() const { return env_steps_; }
  std::int64_t epoch() const { return epoch_; }
  bool done() const { return env_steps_ >= config_.train.env_steps; }

  EpochMetrics train_epoch();
  /// Runs epochs until the step budget is reached.
  void train(const std::function<void(const EpochMetrics&)>& on_epoch = {});

  /// Full training state (networks, optimizers, buffers, RNG, counters).
  void write_state(BinaryWriter& out) const;
  void read_state(BinaryReader& in);

 private:
  std::vector<EpisodePtr> collect();

  SeadsConfig config_;
  Rng rng_;
  sac::SacAgent agent_;
  std::unique_ptr<skills::SkillModel> model_;
  EpisodeBuffers buffers_;
  std::int64_t env_steps_ = 0;
  std::int64_t epoch_ = 0;
  std::uint64_t episodes_collected_ = 0;
};

void write_episode(BinaryWriter& out, const EpisodeRecord& episode);
EpisodeRecord read_episode(BinaryReader& in, const GameSpec& spec);

}  // namespace seads
