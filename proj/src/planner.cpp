#include "seads/planner.hpp"

#include <algorithm>
#include <unordered_map>

namespace seads::planning {

namespace {

constexpr std::size_t kStatesPerQuery = 512;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Clock::time_point deadline_after(double seconds) {
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
}

struct Node {
  std::size_t parent;
  int skill;
};

}  // namespace

GameSuccessors::GameSuccessors(const GameSpec& spec) : spec_(spec), moves_(enumerate_moves(spec)) {}

std::vector<SymbolicObs> GameSuccessors::successors(std::span<const SymbolicObs> states) const {
  std::vector<SymbolicObs> out;
  out.reserve(states.size() * moves_.size());
  for (const auto& z : states) {
    const auto board = from_symbolic(spec_, z);
    for (const auto& mv : moves_) out.push_back(board ? to_symbolic(apply_move(*board, mv)) : z);
  }
  return out;
}

SearchResult bfs_plan(const SuccessorModel& model, const SymbolicObs& start, const SymbolicObs& goal,
                      int max_depth, Clock::time_point deadline) {
  const auto t0 = Clock::now();
  SearchResult result;
  if (start == goal) {
    result.status = SearchStatus::found;
    return result;
  }
  const auto k_count = static_cast<std::size_t>(model.num_skills());
  std::vector<SymbolicObs> states{start};
  std::vector<Node> nodes{{0, -1}};
  std::unordered_map<SymbolicObs, std::size_t, SymbolicObsHash> index{{start, 0}};
  std::size_t layer_begin = 0;

  const auto finish = [&](std::size_t goal_node) {
    std::vector<std::size_t> path;
    for (std::size_t n = goal_node; n != 0; n = nodes[n].parent) path.push_back(n);
    std::reverse(path.begin(), path.end());
    for (auto n : path) {
      result.plan.skills.push_back(nodes[n].skill);
      result.plan.predicted.push_back(states[n]);
    }
    result.status = SearchStatus::found;
  };

  for (int depth = 0; depth < max_depth; ++depth) {
    const std::size_t layer_end = states.size();
    if (layer_begin == layer_end) break;
    for (std::size_t chunk = layer_begin; chunk < layer_end; chunk += kStatesPerQuery) {
      if (Clock::now() >= deadline) {
        result.status = SearchStatus::wall_time_exceeded;
        result.visited = states.size();
        result.seconds = seconds_since(t0);
        return result;
      }
      const std::size_t len = std::min(kStatesPerQuery, layer_end - chunk);
      // copy: `states` grows while the children are inserted
      const std::vector<SymbolicObs> parents(states.begin() + static_cast<std::ptrdiff_t>(chunk),
                                             states.begin() + static_cast<std::ptrdiff_t>(chunk + len));
      const auto children = model.successors(parents);
      result.expansions += len;
      for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t k = 0; k < k_count; ++k) {
          const auto& child = children[i * k_count + k];
          if (index.contains(child)) continue;
          index.emplace(child, states.size());
          states.push_back(child);
          nodes.push_back({chunk + i, static_cast<int>(k)});
          if (child == goal) {
            finish(states.size() - 1);
            result.visited = states.size();
            result.seconds = seconds_since(t0);
            return result;
          }
        }
      }
    }
    layer_begin = layer_end;
  }
  result.status = SearchStatus::no_plan_found;
  result.visited = states.size();
  result.seconds = seconds_since(t0);
  return result;
}

SearchResult bfs_plan(const SuccessorModel& model, const SymbolicObs& start, const SymbolicObs& goal,
                      const PlanLimits& limits) {
  return bfs_plan(model, start, goal, limits.max_depth, deadline_after(limits.wall_time_seconds));
}

std::string_view outcome_name(PlanOutcome outcome) {
  switch (outcome) {
    case PlanOutcome::success: return "success";
    case PlanOutcome::no_plan_found: return "no_plan_found";
    case PlanOutcome::wall_time_exceeded: return "wall_time_exceeded";
    case PlanOutcome::execution_failed: return "execution_failed";
  }
  return "unknown";
}

TaskResult solve_task(const EnvConfig& env, const SkillPolicy& policy, const SuccessorModel& model,
                      const EnvState& initial, const SymbolicObs& goal, bool replan, Rng& rng,
                      const PlanLimits& limits) {
  TaskResult result;
  EnvState state = initial;
  SymbolicObs actual = to_symbolic(state.board);
  if (actual == goal) {
    result.outcome = PlanOutcome::success;
    return result;
  }

  // Returns false (with the outcome set) when no plan is available.
  Plan plan;
  const auto make_plan = [&] {
    const double remaining = limits.wall_time_seconds - result.planning_seconds;
    if (remaining <= 0.0) {
      result.outcome = PlanOutcome::wall_time_exceeded;
      return false;
    }
    const auto search = bfs_plan(model, actual, goal, limits.max_depth, deadline_after(remaining));
    result.planning_seconds += search.seconds;
    ++result.plans;
    if (search.status == SearchStatus::wall_time_exceeded) {
      result.outcome = PlanOutcome::wall_time_exceeded;
      return false;
    }
    if (search.status == SearchStatus::no_plan_found) {
      result.outcome = PlanOutcome::no_plan_found;
      return false;
    }
    plan = search.plan;
    return true;
  };

  if (!make_plan()) return result;
  std::size_t next = 0;
  while (next < plan.skills.size()) {
    const int skill = plan.skills[next];
    auto rollout = apply_skill(env, policy, state, skill, rng);
    ++result.skill_calls;
    result.env_steps += rollout.episode.length();
    state = std::move(rollout.terminal);
    actual = to_symbolic(state.board);
    result.trace.push_back({skill, plan.predicted[next], actual, false});
    ++next;
    if (!replan) continue;
    if (actual == goal) {
      result.outcome = PlanOutcome::success;
      return result;
    }
    if (actual != plan.predicted[next - 1]) {
      if (result.replans >= limits.replan_budget) {
        result.outcome = PlanOutcome::execution_failed;
        return result;
      }
      ++result.replans;
      result.trace.back().replanned = true;
      if (!make_plan()) return result;
      next = 0;
    }
  }
  result.outcome = actual == goal ? PlanOutcome::success : PlanOutcome::execution_failed;
  return result;
}

std::string format_trace(std::span<const TraceStep> trace) {
  std::string out;
  const auto bits = [&](const SymbolicObs& z) {
    for (auto b : z.bits) out.push_back(b ? '1' : '0');
  };
  for (const auto& s : trace) {
    if (!out.empty()) out.push_back(';');
    out += std::to_string(s.skill);
    out.push_back(':');
    bits(s.predicted);
    out.push_back('>');
    bits(s.actual);
    if (s.replanned) out.push_back('!');
  }
  return out;
}

}  // namespace seads::planning
