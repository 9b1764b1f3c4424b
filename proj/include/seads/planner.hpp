#pragma once

// Breadth-first planning over skills on the symbolic level, using the most
// likely successor of a skill model, and plan execution with optional
// replanning.

#include <chrono>
#include <span>
#include <string>
#include <vector>

#include "seads/embedding.hpp"
#include "seads/skill_model.hpp"

namespace seads::planning {

/// Deterministic successor function: one predicted successor per skill.
class SuccessorModel {
 public:
  virtual ~SuccessorModel() = default;
  virtual int num_skills() const = 0;
  /// result[i * K + k] is the successor of states[i] under skill k.
  virtual std::vector<SymbolicObs> successors(std::span<const SymbolicObs> states) const = 0;
};

/// Mode of a learned forward model.
class ForwardModelSuccessors final : public SuccessorModel {
 public:
  explicit ForwardModelSuccessors(const skills::ForwardModel& model) : model_(model) {}
  int num_skills() const override { return model_.num_skills(); }
  std::vector<SymbolicObs> successors(std::span<const SymbolicObs> states) const override {
    return model_.successors(states);
  }

 private:
  const skills::ForwardModel& model_;
};

/// True game dynamics with skill k = k-th move of enumerate_moves.
class GameSuccessors final : public SuccessorModel {
 public:
  explicit GameSuccessors(const GameSpec& spec);
  int num_skills() const override { return static_cast<int>(moves_.size()); }
  std::vector<SymbolicObs> successors(std::span<const SymbolicObs> states) const override;

 private:
  GameSpec spec_;
  std::vector<GameMove> moves_;
};

struct PlanLimits {
  double wall_time_seconds = 60.0;  // cumulative planning time per task
  int max_depth = 12;
  int replan_budget = 10;
};

struct Plan {
  std::vector<int> skills;
  std::vector<SymbolicObs> predicted;  // state after each skill
};

enum class SearchStatus { found, no_plan_found, wall_time_exceeded };

struct SearchResult {
  SearchStatus status = SearchStatus::no_plan_found;
  Plan plan;
  std::size_t expansions = 0;  // states whose successors were queried
  std::size_t visited = 0;
  double seconds = 0.0;
};

using Clock = std::chrono::steady_clock;

/// Shortest skill sequence from `start` to `goal` under `model`. Children are
/// generated in ascending skill order and states are never revisited.
SearchResult bfs_plan(const SuccessorModel& model, const SymbolicObs& start, const SymbolicObs& goal,
                      int max_depth, Clock::time_point deadline);
SearchResult bfs_plan(const SuccessorModel& model, const SymbolicObs& start, const SymbolicObs& goal,
                      const PlanLimits& limits = {});

enum class PlanOutcome { success, no_plan_found, wall_time_exceeded, execution_failed };

std::string_view outcome_name(PlanOutcome outcome);

struct TraceStep {
  int skill = 0;
  SymbolicObs predicted;
  SymbolicObs actual;
  bool replanned = false;  // a new plan was made after this step
};

struct TaskResult {
  PlanOutcome outcome = PlanOutcome::no_plan_found;
  int skill_calls = 0;
  int env_steps = 0;
  int replans = 0;
  int plans = 0;
  double planning_seconds = 0.0;
  std::vector<TraceStep> trace;

  bool success() const { return outcome == PlanOutcome::success; }
};

/// Plans from the symbolic state of `initial` and executes the skills. With
/// `replan`, a deviation of the reached state from the predicted one
/// triggers a new plan from the reached state (at most replan_budget times).
TaskResult solve_task(const EnvConfig& env, const SkillPolicy& policy, const SuccessorModel& model,
                      const EnvState& initial, const SymbolicObs& goal, bool replan, Rng& rng,
                      const PlanLimits& limits = {});

/// Compact text form of a trace: `skill:predicted>actual` tokens separated by ';'
/// with bit strings for states and a trailing '!' on replanning steps.
std::string format_trace(std::span<const TraceStep> trace);

}  // namespace seads::planning
