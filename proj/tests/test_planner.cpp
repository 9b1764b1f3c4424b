#include <gtest/gtest.h>

#include <atomic>

#include "oracles.hpp"
#include "seads/evaluation.hpp"
#include "seads/planner.hpp"

using namespace seads;
using namespace seads::planning;

namespace {

class IdentityModel final : public SuccessorModel {
 public:
  int num_skills() const override { return 3; }
  std::vector<SymbolicObs> successors(std::span<const SymbolicObs> states) const override {
    std::vector<SymbolicObs> out;
    for (const auto& z : states)
      for (int k = 0; k < 3; ++k) out.push_back(z);
    return out;
  }
};

// Scripted skills whose first executed skill triggers the next move instead.
class MisfireOnce final : public SkillPolicy {
 public:
  explicit MisfireOnce(const EnvConfig& env) : inner_(env), moves_(static_cast<int>(inner_.moves().size())) {}
  Action act(const EnvState& state, int skill, Rng& rng) const override {
    if (fired_) return inner_.act(state, skill, rng);
    const Action a = inner_.act(state, (skill + 1) % moves_, rng);
    if (a.trigger > 0) fired_ = true;
    return a;
  }

 private:
  ScriptedSkills inner_;
  int moves_;
  mutable std::atomic<bool> fired_{false};
};

Board task_board(const GameSpec& spec, int depth, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  return generate_board(spec, depth, rng, SplitLabel::train);
}

}  // namespace

TEST(Bfs, StartAtGoalGivesEmptyPlan) {
  const GameSuccessors model(GameSpec::lights_out());
  const auto goal = to_symbolic(goal_board(GameSpec::lights_out()));
  const auto r = bfs_plan(model, goal, goal);
  EXPECT_EQ(r.status, SearchStatus::found);
  EXPECT_TRUE(r.plan.skills.empty());
}

TEST(Bfs, DepthOnePlanIsTheGeneratingMove) {
  const auto spec = GameSpec::lights_out();
  const GameSuccessors model(spec);
  const auto moves = enumerate_moves(spec);
  const auto goal = to_symbolic(goal_board(spec));
  for (std::size_t k = 0; k < moves.size(); ++k) {
    const auto start = to_symbolic(apply_move(goal_board(spec), moves[k]));
    const auto r = bfs_plan(model, start, goal);
    ASSERT_EQ(r.status, SearchStatus::found);
    EXPECT_EQ(r.plan.skills, std::vector<int>{static_cast<int>(k)});
    EXPECT_EQ(r.plan.predicted.back(), goal);
  }
}

TEST(Bfs, PlanLengthEqualsSolutionDepth) {
  for (const auto& spec : {GameSpec::lights_out(), GameSpec::tile_swap()}) {
    const GameSuccessors model(spec);
    const auto goal = to_symbolic(goal_board(spec));
    const auto layers = oracle::layer_sizes(spec, 5);
    for (int depth = 1; depth <= 5; ++depth) {
      for (std::uint64_t s = 0; s < 4; ++s) {
        const Board board = task_board(spec, depth, 100 * static_cast<std::uint64_t>(depth) + s);
        const auto r = bfs_plan(model, to_symbolic(board), goal);
        ASSERT_EQ(r.status, SearchStatus::found);
        EXPECT_EQ(static_cast<int>(r.plan.skills.size()), *solution_depth(board));
        // only states closer than the goal are ever expanded
        std::size_t bound = 0;
        for (int d = 0; d < depth; ++d) bound += layers[static_cast<std::size_t>(d)];
        EXPECT_LE(r.expansions, bound);
        // predicted states replay the plan
        Board b = board;
        const auto moves = enumerate_moves(spec);
        for (std::size_t i = 0; i < r.plan.skills.size(); ++i) {
          b = apply_move(b, moves[static_cast<std::size_t>(r.plan.skills[i])]);
          EXPECT_EQ(to_symbolic(b), r.plan.predicted[i]);
        }
        EXPECT_TRUE(is_goal(b));
      }
    }
  }
}

TEST(Bfs, IdentityModelFindsNoPlan) {
  const auto spec = GameSpec::lights_out(3);
  const auto start = to_symbolic(task_board(spec, 2, 1));
  const auto r = bfs_plan(IdentityModel{}, start, to_symbolic(goal_board(spec)));
  EXPECT_EQ(r.status, SearchStatus::no_plan_found);
  EXPECT_EQ(r.expansions, 1u);
  EXPECT_EQ(r.visited, 1u);
}

TEST(Bfs, MaxDepthLimitsSearch) {
  const auto spec = GameSpec::lights_out(3);
  const GameSuccessors model(spec);
  const auto start = to_symbolic(task_board(spec, 4, 2));
  const auto goal = to_symbolic(goal_board(spec));
  EXPECT_EQ(bfs_plan(model, start, goal, {60.0, 3, 10}).status, SearchStatus::no_plan_found);
  EXPECT_EQ(bfs_plan(model, start, goal, {60.0, 4, 10}).status, SearchStatus::found);
}

TEST(SolveTask, ScriptedSkillsSolveWithoutReplanning) {
  EnvConfig env;
  const ScriptedSkills skills(env);
  const GameSuccessors model(env.game);
  Rng rng = make_stream(70, 0);
  const EnvState s = reset(env, rng, task_board(env.game, 4, 3));
  const auto r = solve_task(env, skills, model, s, to_symbolic(goal_board(env.game)), false, rng);
  EXPECT_TRUE(r.success());
  EXPECT_EQ(r.skill_calls, 4);
  EXPECT_EQ(r.replans, 0);
  EXPECT_EQ(r.plans, 1);
}

TEST(SolveTask, ReplanningRecoversFromAMisfire) {
  EnvConfig env;
  const MisfireOnce policy(env);
  const GameSuccessors model(env.game);
  Rng rng = make_stream(71, 0);
  const EnvState s = reset(env, rng, task_board(env.game, 3, 4));
  const auto r = solve_task(env, policy, model, s, to_symbolic(goal_board(env.game)), true, rng);
  EXPECT_TRUE(r.success());
  EXPECT_GE(r.replans, 1);
  EXPECT_EQ(r.plans, r.replans + 1);
  EXPECT_TRUE(r.trace.front().replanned);
  EXPECT_NE(r.trace.front().predicted, r.trace.front().actual);
  EXPECT_NE(format_trace(r.trace).find('!'), std::string::npos);
}

TEST(SolveTask, WithoutReplanningExecutesTheWholePlan) {
  EnvConfig env;
  const MisfireOnce policy(env);
  const GameSuccessors model(env.game);
  Rng rng = make_stream(72, 0);
  const EnvState s = reset(env, rng, task_board(env.game, 3, 5));
  const auto r = solve_task(env, policy, model, s, to_symbolic(goal_board(env.game)), false, rng);
  EXPECT_EQ(r.outcome, PlanOutcome::execution_failed);
  EXPECT_EQ(r.skill_calls, 3);
  EXPECT_EQ(r.plans, 1);
}

TEST(SolveTask, ReplanBudgetIsEnforced) {
  EnvConfig env;
  const MisfireOnce policy(env);
  const GameSuccessors model(env.game);
  Rng rng = make_stream(73, 0);
  const EnvState s = reset(env, rng, task_board(env.game, 3, 6));
  const auto r = solve_task(env, policy, model, s, to_symbolic(goal_board(env.game)), true, rng, {60.0, 12, 0});
  EXPECT_EQ(r.outcome, PlanOutcome::execution_failed);
  EXPECT_EQ(r.skill_calls, 1);
}

TEST(SolveTask, TinyWallTimeIsReported) {
  EnvConfig env;
  const ScriptedSkills skills(env);
  const GameSuccessors model(env.game);
  Rng rng = make_stream(74, 0);
  const EnvState s = reset(env, rng, task_board(env.game, 5, 7));
  const auto r = solve_task(env, skills, model, s, to_symbolic(goal_board(env.game)), true, rng, {1e-9, 12, 10});
  EXPECT_EQ(r.outcome, PlanOutcome::wall_time_exceeded);
  EXPECT_EQ(r.skill_calls, 0);
}

TEST(SolveTask, SolvedBoardNeedsNoSkills) {
  EnvConfig env;
  const ScriptedSkills skills(env);
  const GameSuccessors model(env.game);
  Rng rng = make_stream(75, 0);
  const EnvState s = reset(env, rng, goal_board(env.game));
  const auto r = solve_task(env, skills, model, s, to_symbolic(goal_board(env.game)), true, rng);
  EXPECT_TRUE(r.success());
  EXPECT_EQ(r.skill_calls, 0);
  EXPECT_EQ(r.plans, 0);
}
