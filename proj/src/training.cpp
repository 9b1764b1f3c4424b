#include "seads/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "seads/assignment.hpp"
#include "seads/kernels.hpp"

namespace seads {

double RewardConfig::clip_floor() const { return -2.0 * std::log(static_cast<double>(num_skills)); }

void RewardConfig::validate() const {
  if (num_skills < 2) throw std::invalid_argument("reward needs at least 2 skills");
}

double reward_from_scores(std::span<const double> log_posterior, std::span<const double> log_likelihood, int skill,
                          const RewardConfig& config) {
  const auto k_count = log_posterior.size();
  if (static_cast<int>(k_count) != config.num_skills) throw std::invalid_argument("reward: posterior length != K");
  if (skill < 0 || skill >= config.num_skills) throw std::out_of_range("reward: skill index out of range");
  const double floor = config.clip_floor();
  double best = -INFINITY, second = -INFINITY;
  for (double q : log_posterior) {
    const double clipped = std::max(q, floor);
    if (clipped > best) {
      second = best;
      best = clipped;
    } else if (clipped > second) {
      second = clipped;
    }
  }
  const double own = std::max(log_posterior[static_cast<std::size_t>(skill)], floor);
  double reward = config.second_best_norm ? own - second : own + std::log(static_cast<double>(config.num_skills));
  if (config.novelty_bonus) {
    if (log_likelihood.size() != k_count) throw std::invalid_argument("novelty bonus needs skill likelihoods");
    reward -= *std::max_element(log_likelihood.begin(), log_likelihood.end());
  }
  return reward;
}

double compute_reward(const SymbolicObs& z0, const SymbolicObs& zT, int skill, const skills::SkillModel& model,
                      const RewardConfig& config) {
  const skills::SymbolicPair pair{&z0, &zT};
  const auto scores = model.score({&pair, 1});
  const auto& post = scores.log_posterior;
  const auto& lik = scores.log_likelihood;
  return reward_from_scores({post.data(), static_cast<std::size_t>(post.size())},
                            {lik.data(), static_cast<std::size_t>(lik.size())}, skill, config);
}

std::vector<int> constrained_relabel(const nn::Matrix& log_posterior, std::span<const int> skills,
                                     std::span<const char> eligible) {
  if (static_cast<std::size_t>(log_posterior.rows()) != skills.size() || skills.size() != eligible.size())
    throw std::invalid_argument("relabel: size mismatch");
  std::vector<int> out(skills.begin(), skills.end());
  std::vector<int> rows;
  std::vector<int> slots;
  for (std::size_t i = 0; i < skills.size(); ++i)
    if (eligible[i]) {
      rows.push_back(static_cast<int>(i));
      slots.push_back(skills[i]);
    }
  if (rows.empty()) return out;
  // One slot per original label occurrence, ascending skill order.
  std::sort(slots.begin(), slots.end());
  const auto n = static_cast<Eigen::Index>(rows.size());
  nn::Matrix cost(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index s = 0; s < n; ++s) {
      const int k = slots[static_cast<std::size_t>(s)];
      if (k < 0 || k >= log_posterior.cols()) throw std::out_of_range("relabel: skill index out of range");
      cost(r, s) = -log_posterior(rows[static_cast<std::size_t>(r)], k);
    }
  const Assignment assignment = solve_assignment(cost);
  for (std::size_t r = 0; r < rows.size(); ++r)
    out[static_cast<std::size_t>(rows[r])] = slots[static_cast<std::size_t>(assignment.column_of_row[r])];
  return out;
}

RelabelOutcome relabel(std::span<const EpisodeRecord* const> episodes, const nn::Matrix& log_posterior,
                       double fraction, Rng& rng) {
  if (fraction < 0.0 || fraction > 1.0) throw std::invalid_argument("relabel fraction must be in [0, 1]");
  RelabelOutcome out;
  std::vector<int> labels;
  std::bernoulli_distribution coin(fraction);
  for (const auto* ep : episodes) {
    labels.push_back(ep->skill);
    const bool selected = coin(rng);
    out.eligible.push_back(selected && ep->changed() ? 1 : 0);
  }
  out.skills = constrained_relabel(log_posterior, labels, out.eligible);
  return out;
}

EpisodeBuffers::EpisodeBuffers(std::size_t long_capacity, std::size_t recent_capacity)
    : long_capacity_(long_capacity), recent_capacity_(recent_capacity) {
  if (long_capacity == 0 || recent_capacity == 0) throw std::invalid_argument("episode buffer capacity must be > 0");
}

void EpisodeBuffers::add(EpisodePtr episode) {
  if (!episode || episode->length() < 1) throw std::invalid_argument("episode buffers accept non-empty episodes only");
  long_.push_back(episode);
  recent_.push_back(std::move(episode));
  while (long_.size() > long_capacity_) long_.pop_front();
  while (recent_.size() > recent_capacity_) recent_.pop_front();
}

void EpisodeBuffers::restore(std::deque<EpisodePtr> long_term, std::deque<EpisodePtr> recent) {
  long_ = std::move(long_term);
  recent_ = std::move(recent);
  while (long_.size() > long_capacity_) long_.pop_front();
  while (recent_.size() > recent_capacity_) recent_.pop_front();
}

std::vector<EpisodePtr> EpisodeBuffers::training_set(std::size_t n, Rng& rng) const {
  std::vector<std::size_t> idx(long_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t take = std::min(n, idx.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<EpisodePtr> out;
  out.reserve(take + recent_.size());
  for (std::size_t i = 0; i < take; ++i) out.push_back(long_[idx[i]]);
  out.insert(out.end(), recent_.begin(), recent_.end());
  return out;
}

void TrainConfig::validate() const {
  if (episodes_per_epoch < 1 || env_steps < 1 || long_buffer < 1 || recent_buffer < 1 || sample_size < 0 ||
      sac_updates < 0 || sac_batch < 1 || fm_updates < 0 || fm_batch < 1)
    throw std::invalid_argument("train: counts must be positive");
  if (fm_relabel_fraction < 0 || fm_relabel_fraction > 1 || sac_relabel_fraction < 0 || sac_relabel_fraction > 1)
    throw std::invalid_argument("train: relabel fractions must be in [0, 1]");
  if (max_board_depth < 1 || max_board_depth > BoardCatalog::kMaxDepth)
    throw std::invalid_argument("train.max_board_depth must be in [1, 5]");
}

void SeadsConfig::validate() const {
  env.validate();
  train.validate();
  reward.validate();
  if (reward.num_skills != num_skills) throw std::invalid_argument("reward.num_skills must equal num_skills");
  if (skill_model.discriminator && reward.novelty_bonus)
    throw std::invalid_argument("the novelty bonus needs a forward model (disable it for the discriminator)");
  if (!(sac.alpha > 0.0)) throw std::invalid_argument("sac.alpha must be > 0");
}

Action SkillAgentPolicy::act(const EnvState& state, int skill, Rng& rng) const {
  const auto input = skill_input(state, skill, num_skills_);
  const auto a = agent_.act(input, mode_, rng);
  return Action::from(a.data());
}

std::vector<double> skill_input(const EnvState& state, int skill, int num_skills) {
  if (skill < 0 || skill >= num_skills) throw std::out_of_range("skill index out of range");
  auto x = observe(state);
  const auto base = x.size();
  x.resize(base + static_cast<std::size_t>(num_skills), 0.0);
  x[base + static_cast<std::size_t>(skill)] = 1.0;
  return x;
}

std::vector<sac::Transition> episode_transitions(const EpisodeRecord& episode, int skill, int num_skills,
                                                 double final_reward) {
  std::vector<sac::Transition> out;
  const int T = episode.length();
  out.reserve(static_cast<std::size_t>(T));
  auto next = skill_input(episode.states[0], skill, num_skills);
  for (int t = 0; t < T; ++t) {
    sac::Transition tr;
    tr.state = std::move(next);
    next = skill_input(episode.states[static_cast<std::size_t>(t + 1)], skill, num_skills);
    tr.next_state = next;
    const auto a = episode.actions[static_cast<std::size_t>(t)].as_array();
    tr.action.assign(a.begin(), a.end());
    const bool last = t + 1 == T;
    tr.reward = last ? final_reward : 0.0;
    tr.terminal = last && episode.cause == TerminationCause::symbolic_change;
    tr.timeout = last && episode.cause == TerminationCause::step_limit;
    out.push_back(std::move(tr));
  }
  return out;
}

namespace {

std::unique_ptr<skills::SkillModel> make_model(const SeadsConfig& c, Rng& rng) {
  const int dim = c.env.game.symbolic_dim();
  if (c.skill_model.discriminator)
    return std::make_unique<skills::SkillDiscriminator>(dim, c.num_skills, rng, c.skill_model.hidden,
                                                        c.skill_model.learning_rate);
  return std::make_unique<skills::ForwardModel>(dim, c.num_skills, rng, c.skill_model.hidden,
                                                c.skill_model.learning_rate);
}

std::vector<skills::SymbolicPair> pairs_of(std::span<const EpisodeRecord* const> episodes) {
  std::vector<skills::SymbolicPair> pairs;
  pairs.reserve(episodes.size());
  for (const auto* ep : episodes) pairs.push_back({&ep->z0, &ep->zT});
  return pairs;
}

std::vector<const EpisodeRecord*> raw(const std::vector<EpisodePtr>& eps) {
  std::vector<const EpisodeRecord*> out;
  out.reserve(eps.size());
  for (const auto& e : eps) out.push_back(e.get());
  return out;
}

// `count` distinct indices of [0, n) when possible, otherwise with repeats.
std::vector<std::size_t> minibatch(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> out;
  if (count >= n) {
    out.resize(n);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  out.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

}  // namespace

SeadsTrainer::SeadsTrainer(const SeadsConfig& config)
    : config_(config),
      rng_(make_stream(config.seed, 0)),
      buffers_(static_cast<std::size_t>(config.train.long_buffer), static_cast<std::size_t>(config.train.recent_buffer)) {
  config_.validate();
  Rng init = make_stream(config.seed, 1);
  agent_ = sac::SacAgent(config_.env.observation_dim() + config_.num_skills, Action::kDim, config_.sac, init);
  model_ = make_model(config_, init);
}

std::vector<EpisodePtr> SeadsTrainer::collect() {
  const kernels::EpisodeSource source{config_.env, config_.num_skills, config_.train.max_board_depth, config_.seed};
  const SkillAgentPolicy policy(agent_, config_.num_skills, sac::ActMode::sample);
  auto episodes = kernels::collect_episodes(source, policy, episodes_collected_, config_.train.episodes_per_epoch);
  episodes_collected_ += static_cast<std::uint64_t>(episodes.size());
  std::vector<EpisodePtr> out;
  for (auto& e : episodes) out.push_back(std::make_shared<const EpisodeRecord>(std::move(e)));
  return out;
}

EpochMetrics SeadsTrainer::train_epoch() {
  const auto& tc = config_.train;
  EpochMetrics m;

  for (auto& ep : collect()) {
    env_steps_ += ep->length();
    buffers_.add(std::move(ep));
  }

  // Skill model on a relabelled training set.
  {
    const auto set = buffers_.training_set(static_cast<std::size_t>(tc.sample_size), rng_);
    const auto eps = raw(set);
    const auto pairs = pairs_of(eps);
    std::vector<int> labels;
    if (tc.fm_relabel) {
      const auto scores = kernels::score_pairs(*model_, pairs);
      labels = relabel(eps, scores.log_posterior, tc.fm_relabel_fraction, rng_).skills;
    } else {
      for (const auto* e : eps) labels.push_back(e->skill);
    }
    std::vector<skills::SymbolicTransition> data;
    data.reserve(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) data.push_back({eps[i]->z0, labels[i], eps[i]->zT});
    double nll = 0.0;
    for (int u = 0; u < tc.fm_updates; ++u) {
      std::vector<skills::SymbolicTransition> batch;
      for (auto i : minibatch(data.size(), static_cast<std::size_t>(tc.fm_batch), rng_)) batch.push_back(data[i]);
      nll += model_->update(batch);
    }
    m.fm_nll = tc.fm_updates > 0 ? nll / tc.fm_updates : 0.0;
  }

  // Policy on a second, partially relabelled training set.
  {
    const auto set = buffers_.training_set(static_cast<std::size_t>(tc.sample_size), rng_);
    const auto eps = raw(set);
    const auto pairs = pairs_of(eps);
    const auto scores = kernels::score_pairs(*model_, pairs);
    std::vector<int> labels;
    if (tc.sac_relabel) {
      labels = relabel(eps, scores.log_posterior, tc.sac_relabel_fraction, rng_).skills;
    } else {
      for (const auto* e : eps) labels.push_back(e->skill);
    }
    sac::TransitionBuffer transitions(std::max<std::size_t>(1, eps.size() * static_cast<std::size_t>(config_.env.step_limit)));
    double reward_sum = 0.0, length_sum = 0.0, changed = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const nn::RowVector post = scores.log_posterior.row(r);
      nn::RowVector lik;
      if (scores.log_likelihood.size() > 0) lik = scores.log_likelihood.row(r);
      const double reward = reward_from_scores({post.data(), static_cast<std::size_t>(post.size())},
                                               {lik.data(), static_cast<std::size_t>(lik.size())}, labels[i],
                                               config_.reward);
      reward_sum += reward;
      length_sum += eps[i]->length();
      changed += eps[i]->changed() ? 1.0 : 0.0;
      for (auto& t : episode_transitions(*eps[i], labels[i], config_.num_skills, reward)) transitions.push(std::move(t));
    }
    const double n = static_cast<double>(eps.size());
    m.mean_reward = reward_sum / n;
    m.mean_length = length_sum / n;
    m.change_fraction = changed / n;

    double actor = 0.0, critic = 0.0;
    for (int u = 0; u < tc.sac_updates; ++u) {
      const auto batch = transitions.sample(static_cast<std::size_t>(tc.sac_batch), rng_);
      const auto losses = agent_.update(batch, rng_);
      actor += losses.actor_loss;
      critic += losses.critic_loss;
    }
    if (tc.sac_updates > 0) {
      m.actor_loss = actor / tc.sac_updates;
      m.critic_loss = critic / tc.sac_updates;
    }
  }

  ++epoch_;
  m.epoch = epoch_;
  m.env_steps = env_steps_;
  m.long_buffer = buffers_.long_term().size();
  m.recent_buffer = buffers_.recent().size();
  return m;
}

void SeadsTrainer::train(const std::function<void(const EpochMetrics&)>& on_epoch) {
  while (!done()) {
    const auto m = train_epoch();
    if (on_epoch) on_epoch(m);
  }
}

void write_episode(BinaryWriter& out, const EpisodeRecord& ep) {
  out.put<std::int32_t>(ep.skill);
  out.put<std::uint8_t>(ep.cause == TerminationCause::symbolic_change ? 1 : 0);
  out.put<std::uint8_t>(ep.first_move ? 1 : 0);
  out.put<std::int32_t>(ep.first_move ? ep.first_move->first : 0);
  out.put<std::int32_t>(ep.first_move ? ep.first_move->second : 0);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(ep.actions.size()));
  for (const auto& s : ep.states) {
    out.put<double>(s.cursor.x);
    out.put<double>(s.cursor.y);
    out.put_string(serialize_board(s.board));
  }
  for (const auto& a : ep.actions) {
    out.put<double>(a.dx);
    out.put<double>(a.dy);
    out.put<double>(a.trigger);
  }
}

EpisodeRecord read_episode(BinaryReader& in, const GameSpec& spec) {
  EpisodeRecord ep;
  ep.skill = in.get<std::int32_t>();
  ep.cause = in.get<std::uint8_t>() ? TerminationCause::symbolic_change : TerminationCause::step_limit;
  const bool has_move = in.get<std::uint8_t>() != 0;
  const GameMove mv{in.get<std::int32_t>(), in.get<std::int32_t>()};
  if (has_move) ep.first_move = mv;
  const auto length = in.get<std::uint32_t>();
  if (length < 1 || length > 100000) throw FormatError("episode length out of range");
  for (std::uint32_t i = 0; i <= length; ++i) {
    EnvState s;
    s.cursor.x = in.get<double>();
    s.cursor.y = in.get<double>();
    s.board = parse_board(spec, in.get_string(4096));
    ep.states.push_back(std::move(s));
  }
  for (std::uint32_t i = 0; i < length; ++i) {
    Action a;
    a.dx = in.get<double>();
    a.dy = in.get<double>();
    a.trigger = in.get<double>();
    ep.actions.push_back(a);
  }
  ep.z0 = to_symbolic(ep.states.front().board);
  ep.zT = to_symbolic(ep.states.back().board);
  return ep;
}

void SeadsTrainer::write_state(BinaryWriter& out) const {
  out.put<std::int64_t>(env_steps_);
  out.put<std::int64_t>(epoch_);
  out.put<std::uint64_t>(episodes_collected_);
  std::ostringstream rng_text;
  rng_text << rng_;
  out.put_string(rng_text.str());
  agent_.write(out);
  skills::write_skill_model(out, *model_);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(buffers_.long_term().size()));
  for (const auto& ep : buffers_.long_term()) write_episode(out, *ep);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(buffers_.recent().size()));
  for (const auto& ep : buffers_.recent()) write_episode(out, *ep);
}

void SeadsTrainer::read_state(BinaryReader& in) {
  env_steps_ = in.get<std::int64_t>();
  epoch_ = in.get<std::int64_t>();
  episodes_collected_ = in.get<std::uint64_t>();
  std::istringstream rng_text(in.get_string(1 << 20));
  rng_text >> rng_;
  if (!rng_text) throw FormatError("corrupt RNG state");
  agent_ = sac::SacAgent::read(in);
  model_ = skills::read_skill_model(in);
  if (agent_.state_dim() != config_.env.observation_dim() + config_.num_skills ||
      model_->num_skills() != config_.num_skills || model_->symbolic_dim() != config_.env.game.symbolic_dim())
    throw FormatError("checkpoint networks do not match the run configuration");
  const auto read_many = [&] {
    std::deque<EpisodePtr> eps;
    const auto n = in.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < n; ++i)
      eps.push_back(std::make_shared<const EpisodeRecord>(read_episode(in, config_.env.game)));
    return eps;
  };
  auto long_eps = read_many();
  auto recent_eps = read_many();
  buffers_.restore(std::move(long_eps), std::move(recent_eps));
}

}  // namespace seads
