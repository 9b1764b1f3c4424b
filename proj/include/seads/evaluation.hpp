#pragma once

// Evaluation protocols: unique game moves covered by the skill set, and task
// success of planning with skills on held-out boards.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "seads/embedding.hpp"
#include "seads/planner.hpp"

namespace seads {

/// Scripted oracle skills: skill k drives the cursor to move (k mod M) of
/// enumerate_moves and triggers it there.
class ScriptedSkills final : public SkillPolicy {
 public:
  explicit ScriptedSkills(const EnvConfig& env);
  Action act(const EnvState& state, int skill, Rng& rng) const override;
  const std::vector<GameMove>& moves() const { return moves_; }

 private:
  EnvConfig env_;
  std::vector<GameMove> moves_;
  std::vector<CursorState> targets_;
};

/// Cursor position at the centre of the field (LightsOut) or shared edge
/// (TileSwap) that triggers `move`.
CursorState move_target(const GameSpec& spec, GameMove move);

/// Split that evaluation boards of this depth come from: test, or val when
/// the test split has no board of that depth.
SplitLabel evaluation_split(const GameSpec& spec, int depth);

struct SkillCountReport {
  double mean_unique_moves = 0.0;
  std::vector<int> unique_moves;  // per initial state
};

/// For each of `num_states` initial states, runs every skill from that same
/// state and counts the distinct game moves triggered first.
SkillCountReport count_skills(const EnvConfig& env, const SkillPolicy& policy, int num_skills, int num_states,
                              std::uint64_t seed, int max_depth = 5, bool parallel = true);

struct TaskRecord {
  int index = 0;
  int depth = 0;
  SplitLabel split = SplitLabel::test;
  std::string board;
  planning::TaskResult result;
};

struct DepthSummary {
  int depth = 0;
  int tasks = 0;
  int successes = 0;
  double success_rate() const { return tasks > 0 ? static_cast<double>(successes) / tasks : 0.0; }
};

struct EvalReport {
  std::vector<DepthSummary> depths;
  std::vector<TaskRecord> tasks;

  double success_rate() const;
  double mean_planning_seconds() const;
  double max_planning_seconds() const;
};

/// Task board for evaluation task `index` of the given depth.
Board evaluation_board(const GameSpec& spec, int depth, std::uint64_t seed, int index);

/// tasks_per_depth tasks for each depth 1..max_depth, solved with the planner.
EvalReport eval_success(const EnvConfig& env, const SkillPolicy& policy, const planning::SuccessorModel& model,
                        const planning::PlanLimits& limits, bool replan, int tasks_per_depth, std::uint64_t seed,
                        int max_depth = 5, bool parallel = true);

/// Per-depth table `depth,tasks,successes,success_rate`.
void write_depth_csv(std::ostream& out, const EvalReport& report);
/// Per-task table (no timing columns, so the output is reproducible).
void write_task_csv(std::ostream& out, const EvalReport& report);

}  // namespace seads
