#include "seads/baseline.hpp"

#include "seads/metrics.hpp"

namespace seads {

namespace {

constexpr std::uint64_t kFlatEpisodeStreamBase = 0x400000000ull;
constexpr std::uint64_t kFlatEvalStreamBase = 0x3c0000000ull;

}  // namespace

FlatEpisode run_flat_episode(const EnvConfig& env, const sac::SacAgent& agent, const EnvState& start,
                             int step_limit, sac::ActMode mode, Rng& rng, sac::TransitionBuffer* buffer) {
  FlatEpisode ep;
  if (is_goal(start.board)) {
    ep.solved = true;
    return ep;
  }
  EnvState state = start;
  auto obs = observe(state);
  for (int t = 0; t < step_limit; ++t) {
    const auto a = agent.act(obs, mode, rng);
    auto next = step(state, Action::from(a.data()), env).next_state;
    auto next_obs = observe(next);
    ++ep.steps;
    const bool solved = is_goal(next.board);
    if (buffer) {
      sac::Transition tr;
      tr.state = obs;
      tr.action = a;
      tr.next_state = next_obs;
      tr.reward = solved ? 1.0 : 0.0;
      tr.terminal = solved;
      tr.timeout = !solved && t + 1 == step_limit;
      buffer->push(std::move(tr));
    }
    state = std::move(next);
    obs = std::move(next_obs);
    if (solved) {
      ep.solved = true;
      break;
    }
  }
  return ep;
}

std::string baseline_csv_row(const BaselineMetrics& m) {
  return csv_row({std::to_string(m.episodes), std::to_string(m.env_steps), std::to_string(m.updates),
                  format_number(m.success_rate), format_number(m.actor_loss), format_number(m.critic_loss)});
}

FlatSacTrainer::FlatSacTrainer(const RunConfig& config)
    : config_(config),
      env_(config.seads().env),
      buffer_(static_cast<std::size_t>(config.baseline.buffer)),
      update_rng_(make_stream(config.seed.value_or(0), 2)) {
  config_.validate();
  sac::SacConfig sc = config_.sac;
  sc.hidden = config_.baseline.hidden;
  sc.hidden_layers = config_.baseline.hidden_layers;
  sc.alpha = config_.baseline.alpha;
  sc.learning_rate = config_.baseline.learning_rate;
  Rng init = make_stream(*config_.seed, 1);
  agent_ = sac::SacAgent(env_.observation_dim(), Action::kDim, sc, init);
}

void FlatSacTrainer::train(const std::function<void(const BaselineMetrics&)>& on_log) {
  const auto& b = config_.baseline;
  const int max_depth = config_.train.max_board_depth;
  BaselineMetrics window;
  int window_episodes = 0, window_solved = 0, window_updates = 0;
  double actor = 0.0, critic = 0.0;
  std::int64_t since_update = 0;
  const auto emit = [&] {
    window.episodes = episodes_;
    window.env_steps = env_steps_;
    window.updates = updates_;
    window.success_rate = window_episodes > 0 ? static_cast<double>(window_solved) / window_episodes : 0.0;
    window.actor_loss = window_updates > 0 ? actor / window_updates : 0.0;
    window.critic_loss = window_updates > 0 ? critic / window_updates : 0.0;
    if (on_log) on_log(window);
    window_episodes = window_solved = window_updates = 0;
    actor = critic = 0.0;
  };
  while (env_steps_ < b.env_steps) {
    Rng rng = make_stream(*config_.seed, kFlatEpisodeStreamBase + static_cast<std::uint64_t>(episodes_));
    const int depth = uniform_int(rng, 1, max_depth);
    const EnvState start = reset(env_, rng, generate_board(env_.game, depth, rng, SplitLabel::train));
    const auto ep = run_flat_episode(env_, agent_, start, b.step_limit_factor * depth, sac::ActMode::sample, rng,
                                     &buffer_);
    ++episodes_;
    ++window_episodes;
    window_solved += ep.solved ? 1 : 0;
    env_steps_ += ep.steps;
    since_update += ep.steps;
    while (since_update >= b.samples_per_update) {
      since_update -= b.samples_per_update;
      if (buffer_.size() < static_cast<std::size_t>(b.batch)) continue;
      const auto batch = buffer_.sample(static_cast<std::size_t>(b.batch), update_rng_);
      const auto losses = agent_.update(batch, update_rng_);
      actor += losses.actor_loss;
      critic += losses.critic_loss;
      ++window_updates;
      ++updates_;
    }
    if (episodes_ % b.log_every_episodes == 0) emit();
  }
  if (window_episodes > 0) emit();
}

EvalReport eval_flat(const EnvConfig& env, const sac::SacAgent& agent, int step_limit_factor, int tasks_per_depth,
                     std::uint64_t seed, int max_depth) {
  EvalReport report;
  for (int d = 1; d <= max_depth; ++d) {
    DepthSummary row{d, 0, 0};
    for (int j = 0; j < tasks_per_depth; ++j) {
      TaskRecord task;
      task.index = (d - 1) * tasks_per_depth + j;
      task.depth = d;
      task.split = evaluation_split(env.game, d);
      Board board = evaluation_board(env.game, d, seed, task.index);
      task.board = serialize_board(board);
      Rng rng = make_stream(seed, kFlatEvalStreamBase + static_cast<std::uint64_t>(task.index));
      const EnvState start = reset(env, rng, std::move(board));
      const auto ep = run_flat_episode(env, agent, start, step_limit_factor * d, sac::ActMode::deterministic, rng,
                                       nullptr);
      task.result.outcome = ep.solved ? planning::PlanOutcome::success : planning::PlanOutcome::execution_failed;
      task.result.env_steps = ep.steps;
      ++row.tasks;
      row.successes += ep.solved ? 1 : 0;
      report.tasks.push_back(std::move(task));
    }
    report.depths.push_back(row);
  }
  return report;
}

}  // namespace seads
