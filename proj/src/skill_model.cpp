#include "seads/skill_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace seads::skills {

namespace {

constexpr Eigen::Index kScoreChunk = 4096;  // columns per batched forward pass

void check_skill(int skill, int num_skills) {
  if (skill < 0 || skill >= num_skills)
    throw std::out_of_range("skill index " + std::to_string(skill) + " out of range [0, " +
                            std::to_string(num_skills) + ")");
}

void check_obs(const SymbolicObs& z, int dim) {
  if (static_cast<int>(z.size()) != dim)
    throw std::invalid_argument("symbolic observation has length " + std::to_string(z.size()) + ", expected " +
                                std::to_string(dim));
}

double clamp_prob(double a) { return std::clamp(a, kProbEpsilon, 1.0 - kProbEpsilon); }

}  // namespace

double bernoulli_log_prob(const SymbolicObs& target, std::span<const double> alpha) {
  if (target.size() != alpha.size()) throw std::invalid_argument("bernoulli_log_prob: length mismatch");
  double lp = 0.0;
  for (std::size_t d = 0; d < alpha.size(); ++d) {
    const double a = clamp_prob(alpha[d]);
    lp += target[d] ? std::log(a) : std::log(1.0 - a);
  }
  return lp;
}

std::vector<double> flip_mixture(const SymbolicObs& z0, std::span<const double> p_flip) {
  if (z0.size() != p_flip.size()) throw std::invalid_argument("flip_mixture: length mismatch");
  std::vector<double> alpha(p_flip.size());
  for (std::size_t d = 0; d < alpha.size(); ++d) {
    const double z = z0[d];
    alpha[d] = (1.0 - z) * p_flip[d] + z * (1.0 - p_flip[d]);
  }
  return alpha;
}

SymbolicObs bernoulli_mode(const SymbolicObs& z0, std::span<const double> alpha) {
  if (z0.size() != alpha.size()) throw std::invalid_argument("bernoulli_mode: length mismatch");
  SymbolicObs out = z0;
  for (std::size_t d = 0; d < alpha.size(); ++d) {
    if (alpha[d] > 0.5) out.bits[d] = 1;
    else if (alpha[d] < 0.5) out.bits[d] = 0;
  }
  return out;
}

Matrix log_normalize_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    if (!std::isfinite(m)) throw nn::NumericalError("log_normalize_rows: non-finite maximum");
    const double lse = m + std::log((logits.row(r).array() - m).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

// ---------------------------------------------------------------------------

ForwardModel::ForwardModel(int symbolic_dim, int num_skills, Rng& rng, int hidden, double learning_rate)
    : dim_(symbolic_dim), num_skills_(num_skills) {
  if (symbolic_dim <= 0 || num_skills < 1) throw std::invalid_argument("forward model dimensions must be positive");
  net_ = nn::Mlp({dim_ + num_skills_, hidden, hidden, dim_}, nn::OutputHead::sigmoid, rng);
  opt_ = nn::AdamState::for_network(net_, {learning_rate, 0.9, 0.999, 1e-8});
}

Matrix ForwardModel::inputs(std::span<const SymbolicObs* const> z0s, std::span<const int> skills) const {
  if (z0s.size() != skills.size()) throw std::invalid_argument("forward model query size mismatch");
  Matrix x = Matrix::Zero(dim_ + num_skills_, static_cast<Eigen::Index>(z0s.size()));
  for (std::size_t i = 0; i < z0s.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    check_obs(*z0s[i], dim_);
    check_skill(skills[i], num_skills_);
    for (int d = 0; d < dim_; ++d) x(d, c) = (*z0s[i])[static_cast<std::size_t>(d)];
    x(dim_ + skills[i], c) = 1.0;
  }
  return x;
}

Matrix ForwardModel::flip_probabilities(std::span<const SymbolicObs* const> z0s, std::span<const int> skills) const {
  return net_.forward(inputs(z0s, skills));
}

std::vector<double> ForwardModel::predict(const SymbolicObs& z0, int skill) const {
  const SymbolicObs* zp = &z0;
  const Matrix p = flip_probabilities({&zp, 1}, {&skill, 1});
  return flip_mixture(z0, {p.data(), static_cast<std::size_t>(p.size())});
}

double ForwardModel::log_prob(const SymbolicTransition& t) const {
  check_obs(t.zT, dim_);
  return bernoulli_log_prob(t.zT, predict(t.z0, t.skill));
}

std::vector<double> ForwardModel::log_posterior(const SymbolicObs& z0, const SymbolicObs& zT) const {
  const SymbolicPair pair{&z0, &zT};
  const auto scores = score({&pair, 1});
  return {scores.log_posterior.data(), scores.log_posterior.data() + scores.log_posterior.size()};
}

SymbolicObs ForwardModel::successor(const SymbolicObs& z0, int skill) const {
  return bernoulli_mode(z0, predict(z0, skill));
}

std::vector<SymbolicObs> ForwardModel::successors(std::span<const SymbolicObs> states) const {
  std::vector<const SymbolicObs*> z0s;
  std::vector<int> skills;
  z0s.reserve(states.size() * static_cast<std::size_t>(num_skills_));
  for (const auto& s : states)
    for (int k = 0; k < num_skills_; ++k) {
      z0s.push_back(&s);
      skills.push_back(k);
    }
  std::vector<SymbolicObs> out;
  out.reserve(z0s.size());
  for (std::size_t begin = 0; begin < z0s.size(); begin += kScoreChunk) {
    const std::size_t end = std::min(z0s.size(), begin + kScoreChunk);
    const Matrix p = flip_probabilities({z0s.data() + begin, end - begin}, {skills.data() + begin, end - begin});
    for (std::size_t i = begin; i < end; ++i) {
      const auto col = p.col(static_cast<Eigen::Index>(i - begin));
      out.push_back(bernoulli_mode(*z0s[i], flip_mixture(*z0s[i], {col.data(), static_cast<std::size_t>(col.size())})));
    }
  }
  return out;
}

SkillScores ForwardModel::score(std::span<const SymbolicPair> pairs) const {
  const auto n = static_cast<Eigen::Index>(pairs.size());
  SkillScores out{Matrix(n, num_skills_), Matrix(n, num_skills_)};
  std::vector<const SymbolicObs*> z0s;
  std::vector<int> skills;
  for (const auto& pr : pairs) {
    check_obs(*pr.zT, dim_);
    for (int k = 0; k < num_skills_; ++k) {
      z0s.push_back(pr.z0);
      skills.push_back(k);
    }
  }
  for (std::size_t begin = 0; begin < z0s.size(); begin += kScoreChunk) {
    const std::size_t end = std::min(z0s.size(), begin + kScoreChunk);
    const Matrix p = flip_probabilities({z0s.data() + begin, end - begin}, {skills.data() + begin, end - begin});
    for (std::size_t q = begin; q < end; ++q) {
      const auto& pr = pairs[q / static_cast<std::size_t>(num_skills_)];
      const auto col = p.col(static_cast<Eigen::Index>(q - begin));
      double lp = 0.0;
      for (int d = 0; d < dim_; ++d) {
        const auto ud = static_cast<std::size_t>(d);
        const double a = clamp_prob((*pr.z0)[ud] ? 1.0 - col(d) : col(d));
        lp += (*pr.zT)[ud] ? std::log(a) : std::log(1.0 - a);
      }
      out.log_likelihood(static_cast<Eigen::Index>(q / static_cast<std::size_t>(num_skills_)),
                         skills[q]) = lp;
    }
  }
  out.log_posterior = log_normalize_rows(out.log_likelihood);
  return out;
}

double ForwardModel::loss(std::span<const SymbolicTransition> batch, nn::MlpGradients* grads) const {
  if (batch.empty()) throw std::invalid_argument("forward model loss on an empty batch");
  std::vector<const SymbolicObs*> z0s;
  std::vector<int> skills;
  for (const auto& t : batch) {
    check_obs(t.zT, dim_);
    z0s.push_back(&t.z0);
    skills.push_back(t.skill);
  }
  nn::MlpCache cache;
  const Matrix p = net_.forward(inputs(z0s, skills), cache);
  const double n = static_cast<double>(batch.size());
  Matrix grad_p = Matrix::Zero(p.rows(), p.cols());
  double nll = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    for (int d = 0; d < dim_; ++d) {
      const auto ud = static_cast<std::size_t>(d);
      const bool z0 = batch[i].z0[ud] != 0;
      const bool zT = batch[i].zT[ud] != 0;
      const double alpha = z0 ? 1.0 - p(d, c) : p(d, c);
      const double a = clamp_prob(alpha);
      nll -= zT ? std::log(a) : std::log(1.0 - a);
      if (alpha > kProbEpsilon && alpha < 1.0 - kProbEpsilon) {
        const double d_alpha = zT ? -1.0 / a : 1.0 / (1.0 - a);
        grad_p(d, c) = (z0 ? -d_alpha : d_alpha) / n;
      }
    }
  }
  if (grads) net_.backward(cache, grad_p, grads);
  return nll / n;
}

double ForwardModel::update(std::span<const SymbolicTransition> batch) {
  nn::MlpGradients grads = net_.zero_gradients();
  const double l = loss(batch, &grads);
  if (!std::isfinite(l)) throw nn::NumericalError("forward model loss is not finite");
  nn::adam_step(net_, grads, opt_);
  return l;
}

void ForwardModel::write(BinaryWriter& out) const {
  out.put<std::int32_t>(dim_);
  out.put<std::int32_t>(num_skills_);
  net_.write(out);
  opt_.write(out);
}

ForwardModel ForwardModel::read(BinaryReader& in) {
  ForwardModel m;
  m.dim_ = in.get<std::int32_t>();
  m.num_skills_ = in.get<std::int32_t>();
  m.net_ = nn::Mlp::read(in);
  m.opt_ = nn::AdamState::read(in);
  if (m.net_.input_dim() != m.dim_ + m.num_skills_ || m.net_.output_dim() != m.dim_)
    throw FormatError("forward model network shape does not match its header");
  return m;
}

// ---------------------------------------------------------------------------

SkillDiscriminator::SkillDiscriminator(int symbolic_dim, int num_skills, Rng& rng, int hidden, double learning_rate)
    : dim_(symbolic_dim), num_skills_(num_skills) {
  if (symbolic_dim <= 0 || num_skills < 1) throw std::invalid_argument("discriminator dimensions must be positive");
  net_ = nn::Mlp({3 * dim_, hidden, hidden, num_skills_}, nn::OutputHead::linear, rng);
  opt_ = nn::AdamState::for_network(net_, {learning_rate, 0.9, 0.999, 1e-8});
}

Matrix SkillDiscriminator::inputs(std::span<const SymbolicPair> pairs) const {
  Matrix x(3 * dim_, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& z0 = *pairs[i].z0;
    const auto& zT = *pairs[i].zT;
    check_obs(z0, dim_);
    check_obs(zT, dim_);
    const auto c = static_cast<Eigen::Index>(i);
    for (int d = 0; d < dim_; ++d) {
      const auto ud = static_cast<std::size_t>(d);
      x(d, c) = z0[ud];
      x(dim_ + d, c) = zT[ud];
      x(2 * dim_ + d, c) = (z0[ud] != zT[ud]) ? 1.0 : 0.0;
    }
  }
  return x;
}

std::vector<double> SkillDiscriminator::log_posterior(const SymbolicObs& z0, const SymbolicObs& zT) const {
  const SymbolicPair pair{&z0, &zT};
  const auto scores = score({&pair, 1});
  return {scores.log_posterior.data(), scores.log_posterior.data() + scores.log_posterior.size()};
}

SkillScores SkillDiscriminator::score(std::span<const SymbolicPair> pairs) const {
  SkillScores out;
  out.log_posterior = Matrix(static_cast<Eigen::Index>(pairs.size()), num_skills_);
  for (std::size_t begin = 0; begin < pairs.size(); begin += kScoreChunk) {
    const std::size_t end = std::min(pairs.size(), begin + static_cast<std::size_t>(kScoreChunk));
    const Matrix logits = net_.forward(inputs(pairs.subspan(begin, end - begin)));
    out.log_posterior.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)) =
        log_normalize_rows(logits.transpose());
  }
  return out;
}

double SkillDiscriminator::loss(std::span<const SymbolicTransition> batch, nn::MlpGradients* grads) const {
  if (batch.empty()) throw std::invalid_argument("discriminator loss on an empty batch");
  std::vector<SymbolicPair> pairs;
  for (const auto& t : batch) {
    check_skill(t.skill, num_skills_);
    pairs.push_back({&t.z0, &t.zT});
  }
  nn::MlpCache cache;
  const Matrix logits = net_.forward(inputs(pairs), cache);
  const Matrix log_p = log_normalize_rows(logits.transpose()).transpose();  // K x B
  const double n = static_cast<double>(batch.size());
  Matrix grad = log_p.array().exp().matrix() / n;
  double nll = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    nll -= log_p(batch[i].skill, c);
    grad(batch[i].skill, c) -= 1.0 / n;
  }
  if (grads) net_.backward(cache, grad, grads);
  return nll / n;
}

double SkillDiscriminator::update(std::span<const SymbolicTransition> batch) {
  nn::MlpGradients grads = net_.zero_gradients();
  const double l = loss(batch, &grads);
  if (!std::isfinite(l)) throw nn::NumericalError("discriminator loss is not finite");
  nn::adam_step(net_, grads, opt_);
  return l;
}

void SkillDiscriminator::write(BinaryWriter& out) const {
  out.put<std::int32_t>(dim_);
  out.put<std::int32_t>(num_skills_);
  net_.write(out);
  opt_.write(out);
}

SkillDiscriminator SkillDiscriminator::read(BinaryReader& in) {
  SkillDiscriminator m;
  m.dim_ = in.get<std::int32_t>();
  m.num_skills_ = in.get<std::int32_t>();
  m.net_ = nn::Mlp::read(in);
  m.opt_ = nn::AdamState::read(in);
  if (m.net_.input_dim() != 3 * m.dim_ || m.net_.output_dim() != m.num_skills_)
    throw FormatError("discriminator network shape does not match its header");
  return m;
}

void write_skill_model(BinaryWriter& out, const SkillModel& model) {
  out.put<std::uint8_t>(model.has_likelihood() ? 0 : 1);
  model.write(out);
}

std::unique_ptr<SkillModel> read_skill_model(BinaryReader& in) {
  const auto tag = in.get<std::uint8_t>();
  if (tag == 0) return std::make_unique<ForwardModel>(ForwardModel::read(in));
  if (tag == 1) return std::make_unique<SkillDiscriminator>(SkillDiscriminator::read(in));
  throw FormatError("unknown skill model tag");
}

}  // namespace seads::skills
