#pragma once

// Learned models of skill effects on the symbolic state:
//  - ForwardModel: factorized Bernoulli q(z_T | z_0, k) with a flip
//    parameterization alpha = (1 - z_0) p_flip + z_0 (1 - p_flip).
//  - SkillDiscriminator: categorical q(k | z_0, z_T) (VIC-style ablation).

#include <memory>
#include <span>
#include <vector>

#include "seads/boardgames.hpp"
#include "seads/neural.hpp"

namespace seads::skills {

using nn::Matrix;
using nn::Vector;

/// Probabilities are clamped to [eps, 1 - eps] before taking logs.
inline constexpr double kProbEpsilon = 1e-7;

struct SymbolicTransition {
  SymbolicObs z0;
  int skill = 0;  // 0-based
  SymbolicObs zT;
};

/// An observed symbolic change (z_0 -> z_T), independent of the skill label.
struct SymbolicPair {
  const SymbolicObs* z0 = nullptr;
  const SymbolicObs* zT = nullptr;
};

/// Per-pair scores over all K skills (rows = pairs, columns = skills).
struct SkillScores {
  Matrix log_posterior;   // log q(k | z_0, z_T)
  Matrix log_likelihood;  // log q(z_T | z_0, k); empty for models without one
};

double bernoulli_log_prob(const SymbolicObs& target, std::span<const double> alpha);
/// Bernoulli parameters of z_T given z_0 and per-bit flip probabilities.
std::vector<double> flip_mixture(const SymbolicObs& z0, std::span<const double> p_flip);
/// Per-bit mode; alpha exactly 0.5 keeps the bit of z0.
SymbolicObs bernoulli_mode(const SymbolicObs& z0, std::span<const double> alpha);
/// Row-wise log-softmax.
Matrix log_normalize_rows(const Matrix& logits);

class SkillModel {
 public:
  virtual ~SkillModel() = default;
  virtual int num_skills() const = 0;
  virtual int symbolic_dim() const = 0;
  virtual bool has_likelihood() const = 0;
  virtual SkillScores score(std::span<const SymbolicPair> pairs) const = 0;
  /// One Adam step on the mean negative log-likelihood; returns the pre-step loss.
  virtual double update(std::span<const SymbolicTransition> batch) = 0;
  virtual std::unique_ptr<SkillModel> clone() const = 0;
  virtual void write(BinaryWriter& out) const = 0;
};

class ForwardModel final : public SkillModel {
 public:
  ForwardModel() = default;
  ForwardModel(int symbolic_dim, int num_skills, Rng& rng, int hidden = 256, double learning_rate = 1e-3);

  int num_skills() const override { return num_skills_; }
  int symbolic_dim() const override { return dim_; }
  bool has_likelihood() const override { return true; }

  /// p_flip for one column per (z0, k) query.
  Matrix flip_probabilities(std::span<const SymbolicObs* const> z0s, std::span<const int> skills) const;

  std::vector<double> predict(const SymbolicObs& z0, int skill) const;
  double log_prob(const SymbolicTransition& t) const;
  /// log q(k | z0, zT) for k = 0..K-1, normalized with log-sum-exp.
  std::vector<double> log_posterior(const SymbolicObs& z0, const SymbolicObs& zT) const;
  SymbolicObs successor(const SymbolicObs& z0, int skill) const;
  /// successor(z, k) for every state and every skill; result[i * K + k].
  std::vector<SymbolicObs> successors(std::span<const SymbolicObs> states) const;

  SkillScores score(std::span<const SymbolicPair> pairs) const override;
  double update(std::span<const SymbolicTransition> batch) override;
  /// Mean NLL over `batch`; gradients of it written to `grads` when non-null.
  double loss(std::span<const SymbolicTransition> batch, nn::MlpGradients* grads) const;

  std::unique_ptr<SkillModel> clone() const override { return std::make_unique<ForwardModel>(*this); }
  void write(BinaryWriter& out) const override;
  static ForwardModel read(BinaryReader& in);

  nn::Mlp& network() { return net_; }
  const nn::Mlp& network() const { return net_; }

 private:
  Matrix inputs(std::span<const SymbolicObs* const> z0s, std::span<const int> skills) const;

  int dim_ = 0;
  int num_skills_ = 0;
  nn::Mlp net_;
  nn::AdamState opt_;
};

class SkillDiscriminator final : public SkillModel {
 public:
  SkillDiscriminator() = default;
  SkillDiscriminator(int symbolic_dim, int num_skills, Rng& rng, int hidden = 256, double learning_rate = 1e-3);

  int num_skills() const override { return num_skills_; }
  int symbolic_dim() const override { return dim_; }
  bool has_likelihood() const override { return false; }

  std::vector<double> log_posterior(const SymbolicObs& z0, const SymbolicObs& zT) const;
  SkillScores score(std::span<const SymbolicPair> pairs) const override;
  double update(std::span<const SymbolicTransition> batch) override;
  /// Mean categorical cross-entropy over `batch`.
  double loss(std::span<const SymbolicTransition> batch, nn::MlpGradients* grads) const;

  std::unique_ptr<SkillModel> clone() const override { return std::make_unique<SkillDiscriminator>(*this); }
  void write(BinaryWriter& out) const override;
  static SkillDiscriminator read(BinaryReader& in);

  nn::Mlp& network() { return net_; }
  const nn::Mlp& network() const { return net_; }

 private:
  /// Network input [z0, zT, z0 XOR zT] per pair.
  Matrix inputs(std::span<const SymbolicPair> pairs) const;

  int dim_ = 0;
  int num_skills_ = 0;
  nn::Mlp net_;
  nn::AdamState opt_;
};

/// Tagged model serialization (0 = forward model, 1 = discriminator).
void write_skill_model(BinaryWriter& out, const SkillModel& model);
std::unique_ptr<SkillModel> read_skill_model(BinaryReader& in);

}  // namespace seads::skills
