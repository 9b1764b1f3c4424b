#include "seads/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <set>

#include "seads/metrics.hpp"

namespace seads {

namespace {

constexpr std::uint64_t kTaskStreamBase = 0x200000000ull;
constexpr std::uint64_t kCountStateStreamBase = 0x300000000ull;
constexpr std::uint64_t kCountSkillStreamBase = 0x380000000ull;
constexpr std::uint64_t kExecutionStreamBase = 0x3c0000000ull;

template <class F>
void for_each_index(std::int64_t n, bool parallel, F&& body) {
  if (!parallel) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(seads_eval_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

CursorState move_target(const GameSpec& spec, GameMove move) {
  if (spec.kind == GameKind::lights_out) {
    const double n = spec.size;
    return {(move.second + 0.5) / n, (move.first + 0.5) / n};
  }
  const int ra = move.first / 3, ca = move.first % 3;
  const int rb = move.second / 3, cb = move.second % 3;
  return {(ca + cb + 1) / 6.0, (ra + rb + 1) / 6.0};
}

ScriptedSkills::ScriptedSkills(const EnvConfig& env) : env_(env), moves_(enumerate_moves(env.game)) {
  for (const auto& mv : moves_) targets_.push_back(move_target(env.game, mv));
}

Action ScriptedSkills::act(const EnvState& state, int skill, Rng&) const {
  const auto m = static_cast<std::size_t>(skill) % moves_.size();
  const auto& target = targets_[m];
  const double d = env_.max_displacement;
  Action a;
  a.dx = std::clamp((target.x - state.cursor.x) / d, -1.0, 1.0);
  a.dy = std::clamp((target.y - state.cursor.y) / d, -1.0, 1.0);
  const CursorState next{std::clamp(state.cursor.x + d * a.dx, 0.0, 1.0),
                         std::clamp(state.cursor.y + d * a.dy, 0.0, 1.0)};
  const auto mv = move_at(env_, next);
  a.trigger = mv && *mv == moves_[m] ? 1.0 : -1.0;
  return a;
}

SplitLabel evaluation_split(const GameSpec& spec, int depth) {
  return catalog_for(spec).count(depth, SplitLabel::test) > 0 ? SplitLabel::test : SplitLabel::val;
}

SkillCountReport count_skills(const EnvConfig& env, const SkillPolicy& policy, int num_skills, int num_states,
                              std::uint64_t seed, int max_depth, bool parallel) {
  if (num_skills < 1 || num_states < 1) throw std::invalid_argument("count_skills needs K >= 1 and N >= 1");
  SkillCountReport report;
  report.unique_moves.assign(static_cast<std::size_t>(num_states), 0);
  for_each_index(num_states, parallel, [&](std::int64_t i) {
    Rng rng = make_stream(seed, kCountStateStreamBase + static_cast<std::uint64_t>(i));
    const int depth = uniform_int(rng, 1, max_depth);
    const EnvState start = reset(env, rng, generate_board(env.game, depth, rng, evaluation_split(env.game, depth)));
    std::set<GameMove> moves;
    for (int k = 0; k < num_skills; ++k) {
      Rng skill_rng = make_stream(seed, kCountSkillStreamBase + static_cast<std::uint64_t>(i * num_skills + k));
      const auto rollout = apply_skill(env, policy, start, k, skill_rng);
      if (rollout.episode.first_move) moves.insert(*rollout.episode.first_move);
    }
    report.unique_moves[static_cast<std::size_t>(i)] = static_cast<int>(moves.size());
  });
  double sum = 0.0;
  for (int u : report.unique_moves) sum += u;
  report.mean_unique_moves = sum / num_states;
  return report;
}

double EvalReport::success_rate() const {
  if (tasks.empty()) return 0.0;
  const auto ok = std::count_if(tasks.begin(), tasks.end(), [](const TaskRecord& t) { return t.result.success(); });
  return static_cast<double>(ok) / static_cast<double>(tasks.size());
}

double EvalReport::mean_planning_seconds() const {
  if (tasks.empty()) return 0.0;
  double s = 0.0;
  for (const auto& t : tasks) s += t.result.planning_seconds;
  return s / static_cast<double>(tasks.size());
}

double EvalReport::max_planning_seconds() const {
  double m = 0.0;
  for (const auto& t : tasks) m = std::max(m, t.result.planning_seconds);
  return m;
}

Board evaluation_board(const GameSpec& spec, int depth, std::uint64_t seed, int index) {
  Rng rng = make_stream(seed, kTaskStreamBase + static_cast<std::uint64_t>(index));
  return generate_board(spec, depth, rng, evaluation_split(spec, depth));
}

EvalReport eval_success(const EnvConfig& env, const SkillPolicy& policy, const planning::SuccessorModel& model,
                        const planning::PlanLimits& limits, bool replan, int tasks_per_depth, std::uint64_t seed,
                        int max_depth, bool parallel) {
  EvalReport report;
  const int n = tasks_per_depth * max_depth;
  report.tasks.resize(static_cast<std::size_t>(n));
  const SymbolicObs goal = to_symbolic(goal_board(env.game));
  for_each_index(n, parallel, [&](std::int64_t i) {
    auto& task = report.tasks[static_cast<std::size_t>(i)];
    task.index = static_cast<int>(i);
    task.depth = static_cast<int>(i) / tasks_per_depth + 1;
    task.split = evaluation_split(env.game, task.depth);
    Board board = evaluation_board(env.game, task.depth, seed, task.index);
    task.board = serialize_board(board);
    Rng rng = make_stream(seed, kExecutionStreamBase + static_cast<std::uint64_t>(i));
    const EnvState start = reset(env, rng, std::move(board));
    task.result = planning::solve_task(env, policy, model, start, goal, replan, rng, limits);
  });
  for (int d = 1; d <= max_depth; ++d) {
    DepthSummary row{d, 0, 0};
    for (const auto& t : report.tasks)
      if (t.depth == d) {
        ++row.tasks;
        row.successes += t.result.success() ? 1 : 0;
      }
    report.depths.push_back(row);
  }
  return report;
}

void write_depth_csv(std::ostream& out, const EvalReport& report) {
  out << "depth,tasks,successes,success_rate\n";
  for (const auto& d : report.depths)
    out << csv_row({std::to_string(d.depth), std::to_string(d.tasks), std::to_string(d.successes),
                    format_number(d.success_rate())})
        << '\n';
}

void write_task_csv(std::ostream& out, const EvalReport& report) {
  out << "task,depth,split,board,outcome,skill_calls,env_steps,plans,replans,trace\n";
  for (const auto& t : report.tasks) {
    const auto& r = t.result;
    // the board text holds commas; quote it
    out << csv_row({std::to_string(t.index), std::to_string(t.depth), std::string(split_name(t.split)),
                    "\"" + t.board + "\"", std::string(planning::outcome_name(r.outcome)),
                    std::to_string(r.skill_calls), std::to_string(r.env_steps), std::to_string(r.plans),
                    std::to_string(r.replans), planning::format_trace(r.trace)})
        << '\n';
  }
}

}  // namespace seads
