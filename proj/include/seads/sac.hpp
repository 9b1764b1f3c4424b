#pragma once

// Soft actor-critic with twin critics, target critics and a fixed entropy
// coefficient.

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "seads/neural.hpp"
#include "seads/rng.hpp"

namespace seads::sac {

using nn::Matrix;
using nn::RowVector;

struct SacConfig {
  double learning_rate = 3e-4;
  double tau = 0.005;
  double gamma = 0.99;
  double alpha = 0.1;  // entropy coefficient, not tuned online
  int hidden = 512;
  int hidden_layers = 2;
};

struct Transition {
  std::vector<double> state;  // includes the one-hot skill for skill policies
  std::vector<double> action;
  std::vector<double> next_state;
  double reward = 0.0;
  bool terminal = false;  // no bootstrap
  bool timeout = false;   // truncated by a step limit; bootstraps
};

/// Bounded FIFO of transitions.
class TransitionBuffer {
 public:
  explicit TransitionBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }
  /// `batch` indices drawn uniformly with replacement.
  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;
  void clear() { items_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

/// Column-stacked batch.
struct Batch {
  Matrix states;
  Matrix actions;
  Matrix next_states;
  RowVector rewards;
  RowVector bootstrap;  // 0 for terminal transitions, 1 otherwise
};

Batch assemble(std::span<const Transition* const> transitions);

struct LossMetrics {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double mean_q = 0.0;
  double mean_log_prob = 0.0;
};

enum class ActMode { sample, deterministic };

class SacAgent {
 public:
  SacAgent() = default;
  SacAgent(int state_dim, int action_dim, SacConfig config, Rng& rng);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  const SacConfig& config() const { return config_; }

  std::vector<double> act(std::span<const double> state, ActMode mode, Rng& rng) const;
  /// One action per column of `states`.
  Matrix act_batch(const Matrix& states, ActMode mode, Rng& rng) const;

  /// Critic step, actor step, then target update.
  LossMetrics update(std::span<const Transition* const> batch, Rng& rng);

  /// target <- tau * online + (1 - tau) * target
  void soft_update(double tau);

  /// Regression targets r + gamma * bootstrap * (min target Q - alpha log pi).
  RowVector critic_targets(const Batch& batch, const Matrix& next_noise) const;
  /// Sum over both critics of the mean squared TD error.
  double critic_loss(const Batch& batch, const RowVector& targets, nn::MlpGradients* grad1,
                     nn::MlpGradients* grad2) const;
  /// mean(alpha log pi(a|s) - min(Q1, Q2)(s, a)) with a reparameterized by `noise`.
  double actor_loss(const Batch& batch, const Matrix& noise, nn::MlpGradients* grad, double* mean_log_prob = nullptr,
                    double* mean_q = nullptr) const;

  nn::Mlp& actor() { return actor_; }
  const nn::Mlp& actor() const { return actor_; }
  nn::Mlp& critic(int i) { return i == 0 ? critic1_ : critic2_; }
  const nn::Mlp& critic(int i) const { return i == 0 ? critic1_ : critic2_; }
  const nn::Mlp& target_critic(int i) const { return i == 0 ? target1_ : target2_; }

  void write(BinaryWriter& out) const;
  static SacAgent read(BinaryReader& in);

 private:
  Matrix critic_input(const Matrix& states, const Matrix& actions) const;

  int state_dim_ = 0;
  int action_dim_ = 0;
  SacConfig config_;
  nn::Mlp actor_, critic1_, critic2_, target1_, target2_;
  nn::AdamState actor_opt_, critic1_opt_, critic2_opt_;
};

}  // namespace seads::sac
