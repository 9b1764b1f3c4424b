#include "seads/sac.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace seads::sac {

namespace {

std::vector<int> layer_sizes(int in, int hidden, int layers, int out) {
  std::vector<int> sizes{in};
  for (int i = 0; i < layers; ++i) sizes.push_back(hidden);
  sizes.push_back(out);
  return sizes;
}

Matrix gaussian_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix noise(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) noise(r, c) = standard_normal(rng);
  return noise;
}

}  // namespace

TransitionBuffer::TransitionBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("transition buffer capacity must be positive");
}

void TransitionBuffer::push(Transition t) {
  if (t.terminal && t.timeout) throw std::invalid_argument("transition cannot be both terminal and timeout");
  if (!std::isfinite(t.reward)) throw std::invalid_argument("transition reward must be finite");
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

std::vector<const Transition*> TransitionBuffer::sample(std::size_t batch, Rng& rng) const {
  if (items_.empty()) throw std::logic_error("sampling from an empty transition buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) out.push_back(&items_[pick(rng)]);
  return out;
}

Batch assemble(std::span<const Transition* const> transitions) {
  if (transitions.empty()) throw std::invalid_argument("empty SAC batch");
  const auto n = static_cast<Eigen::Index>(transitions.size());
  const auto sd = static_cast<Eigen::Index>(transitions.front()->state.size());
  const auto ad = static_cast<Eigen::Index>(transitions.front()->action.size());
  Batch b{Matrix(sd, n), Matrix(ad, n), Matrix(sd, n), RowVector(n), RowVector(n)};
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto& t = *transitions[static_cast<std::size_t>(c)];
    if (static_cast<Eigen::Index>(t.state.size()) != sd || static_cast<Eigen::Index>(t.next_state.size()) != sd ||
        static_cast<Eigen::Index>(t.action.size()) != ad)
      throw std::invalid_argument("inconsistent transition dimensions in batch");
    b.states.col(c) = Eigen::Map<const nn::Vector>(t.state.data(), sd);
    b.next_states.col(c) = Eigen::Map<const nn::Vector>(t.next_state.data(), sd);
    b.actions.col(c) = Eigen::Map<const nn::Vector>(t.action.data(), ad);
    b.rewards(c) = t.reward;
    b.bootstrap(c) = t.terminal ? 0.0 : 1.0;
  }
  return b;
}

SacAgent::SacAgent(int state_dim, int action_dim, SacConfig config, Rng& rng)
    : state_dim_(state_dim), action_dim_(action_dim), config_(config) {
  if (state_dim <= 0 || action_dim <= 0) throw std::invalid_argument("SAC dimensions must be positive");
  if (!(config.alpha > 0.0)) throw std::invalid_argument("SAC entropy coefficient must be > 0");
  actor_ = nn::Mlp(layer_sizes(state_dim, config.hidden, config.hidden_layers, 2 * action_dim), nn::OutputHead::gaussian,
                   rng);
  const auto critic_sizes = layer_sizes(state_dim + action_dim, config.hidden, config.hidden_layers, 1);
  critic1_ = nn::Mlp(critic_sizes, nn::OutputHead::linear, rng);
  critic2_ = nn::Mlp(critic_sizes, nn::OutputHead::linear, rng);
  target1_ = critic1_;
  target2_ = critic2_;
  const nn::AdamConfig adam{config.learning_rate, 0.9, 0.999, 1e-8};
  actor_opt_ = nn::AdamState::for_network(actor_, adam);
  critic1_opt_ = nn::AdamState::for_network(critic1_, adam);
  critic2_opt_ = nn::AdamState::for_network(critic2_, adam);
}

Matrix SacAgent::critic_input(const Matrix& states, const Matrix& actions) const {
  Matrix x(states.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

std::vector<double> SacAgent::act(std::span<const double> state, ActMode mode, Rng& rng) const {
  const Matrix s = Eigen::Map<const nn::Vector>(state.data(), static_cast<Eigen::Index>(state.size()));
  const Matrix a = act_batch(s, mode, rng);
  return {a.data(), a.data() + a.size()};
}

Matrix SacAgent::act_batch(const Matrix& states, ActMode mode, Rng& rng) const {
  const Matrix head = actor_.forward(states);
  if (mode == ActMode::deterministic) return nn::squashed_mode(head);
  return nn::squashed_gaussian(head, rng).action;
}

RowVector SacAgent::critic_targets(const Batch& batch, const Matrix& next_noise) const {
  const auto next = nn::squashed_gaussian(actor_.forward(batch.next_states), next_noise);
  const Matrix x = critic_input(batch.next_states, next.action);
  const RowVector q = target1_.forward(x).row(0).cwiseMin(target2_.forward(x).row(0));
  const RowVector soft_value = q - config_.alpha * next.log_prob;
  return batch.rewards + config_.gamma * batch.bootstrap.cwiseProduct(soft_value);
}

double SacAgent::critic_loss(const Batch& batch, const RowVector& targets, nn::MlpGradients* grad1,
                             nn::MlpGradients* grad2) const {
  const Matrix x = critic_input(batch.states, batch.actions);
  const double n = static_cast<double>(x.cols());
  double total = 0.0;
  const nn::Mlp* nets[2] = {&critic1_, &critic2_};
  nn::MlpGradients* grads[2] = {grad1, grad2};
  for (int i = 0; i < 2; ++i) {
    nn::MlpCache cache;
    const RowVector diff = nets[i]->forward(x, cache).row(0) - targets;
    total += diff.squaredNorm() / n;
    if (grads[i]) nets[i]->backward(cache, (2.0 / n) * diff, grads[i]);
  }
  return total;
}

double SacAgent::actor_loss(const Batch& batch, const Matrix& noise, nn::MlpGradients* grad, double* mean_log_prob,
                            double* mean_q) const {
  nn::MlpCache actor_cache;
  const Matrix head = actor_.forward(batch.states, actor_cache);
  const auto sample = nn::squashed_gaussian(head, noise);
  const Matrix x = critic_input(batch.states, sample.action);
  nn::MlpCache c1, c2;
  const RowVector q1 = critic1_.forward(x, c1).row(0);
  const RowVector q2 = critic2_.forward(x, c2).row(0);
  const RowVector q = q1.cwiseMin(q2);
  const double n = static_cast<double>(x.cols());
  const double loss = (config_.alpha * sample.log_prob - q).sum() / n;
  if (mean_log_prob) *mean_log_prob = sample.log_prob.mean();
  if (mean_q) *mean_q = q.mean();
  if (grad) {
    RowVector g1 = RowVector::Zero(x.cols());
    RowVector g2 = RowVector::Zero(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) (q1(c) <= q2(c) ? g1 : g2)(c) = -1.0 / n;
    const Matrix dx = critic1_.backward(c1, g1, nullptr) + critic2_.backward(c2, g2, nullptr);
    const Matrix d_action = dx.bottomRows(action_dim_);
    const RowVector d_log_prob = RowVector::Constant(x.cols(), config_.alpha / n);
    actor_.backward(actor_cache, nn::squashed_gaussian_backward(sample, d_action, d_log_prob), grad);
  }
  return loss;
}

LossMetrics SacAgent::update(std::span<const Transition* const> transitions, Rng& rng) {
  const Batch batch = assemble(transitions);
  if (batch.states.rows() != state_dim_ || batch.actions.rows() != action_dim_)
    throw std::invalid_argument("SAC batch dimensions do not match the agent");
  LossMetrics metrics;

  const RowVector targets = critic_targets(batch, gaussian_noise(action_dim_, batch.states.cols(), rng));
  nn::MlpGradients g1 = critic1_.zero_gradients();
  nn::MlpGradients g2 = critic2_.zero_gradients();
  metrics.critic_loss = critic_loss(batch, targets, &g1, &g2);
  if (!std::isfinite(metrics.critic_loss)) throw nn::NumericalError("SAC critic loss is not finite");
  nn::adam_step(critic1_, g1, critic1_opt_);
  nn::adam_step(critic2_, g2, critic2_opt_);

  nn::MlpGradients ga = actor_.zero_gradients();
  metrics.actor_loss = actor_loss(batch, gaussian_noise(action_dim_, batch.states.cols(), rng), &ga,
                                  &metrics.mean_log_prob, &metrics.mean_q);
  if (!std::isfinite(metrics.actor_loss)) throw nn::NumericalError("SAC actor loss is not finite");
  nn::adam_step(actor_, ga, actor_opt_);

  soft_update(config_.tau);
  return metrics;
}

void SacAgent::soft_update(double tau) {
  target1_.soft_update_from(critic1_, tau);
  target2_.soft_update_from(critic2_, tau);
}

void SacAgent::write(BinaryWriter& out) const {
  out.put<std::int32_t>(state_dim_);
  out.put<std::int32_t>(action_dim_);
  out.put<double>(config_.learning_rate);
  out.put<double>(config_.tau);
  out.put<double>(config_.gamma);
  out.put<double>(config_.alpha);
  out.put<std::int32_t>(config_.hidden);
  out.put<std::int32_t>(config_.hidden_layers);
  for (const auto* net : {&actor_, &critic1_, &critic2_, &target1_, &target2_}) net->write(out);
  for (const auto* opt : {&actor_opt_, &critic1_opt_, &critic2_opt_}) opt->write(out);
}

SacAgent SacAgent::read(BinaryReader& in) {
  SacAgent a;
  a.state_dim_ = in.get<std::int32_t>();
  a.action_dim_ = in.get<std::int32_t>();
  a.config_.learning_rate = in.get<double>();
  a.config_.tau = in.get<double>();
  a.config_.gamma = in.get<double>();
  a.config_.alpha = in.get<double>();
  a.config_.hidden = in.get<std::int32_t>();
  a.config_.hidden_layers = in.get<std::int32_t>();
  for (auto* net : {&a.actor_, &a.critic1_, &a.critic2_, &a.target1_, &a.target2_}) *net = nn::Mlp::read(in);
  for (auto* opt : {&a.actor_opt_, &a.critic1_opt_, &a.critic2_opt_}) *opt = nn::AdamState::read(in);
  if (a.actor_.input_dim() != a.state_dim_ || a.actor_.output_dim() != 2 * a.action_dim_ ||
      a.critic1_.input_dim() != a.state_dim_ + a.action_dim_)
    throw FormatError("SAC agent network shapes do not match its header");
  return a;
}

}  // namespace seads::sac
