#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "seads/baseline.hpp"
#include "seads/config.hpp"
#include "seads/evaluation.hpp"
#include "seads/metrics.hpp"

using namespace seads;

namespace {

// Every skill performs the same move.
class SameMove final : public SkillPolicy {
 public:
  explicit SameMove(const EnvConfig& env) : inner_(env) {}
  Action act(const EnvState& state, int, Rng& rng) const override { return inner_.act(state, 0, rng); }

 private:
  ScriptedSkills inner_;
};

template <class F>
std::string config_error_path(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, SeedIsRequired) {
  const auto c = parse_config("{}");
  EXPECT_EQ(config_error_path([&] { c.validate(); }), "seed");
  EXPECT_NO_THROW(parse_config(R"({"seed": 4})").validate());
}

TEST(Config, UnknownFieldsAndWrongTypesNameTheirPath) {
  EXPECT_EQ(config_error_path([] { parse_config(R"({"seed": 1, "train": {"env_stepz": 5}})"); }), "train.env_stepz");
  EXPECT_EQ(config_error_path([] { parse_config(R"({"seed": 1, "bogus": true})"); }), "bogus");
  EXPECT_EQ(config_error_path([] { parse_config(R"({"seed": "one"})"); }), "seed");
  EXPECT_EQ(config_error_path([] { parse_config(R"({"sac": {"alpha": [1]}})"); }), "sac.alpha");
  EXPECT_EQ(config_error_path([] { parse_config(R"({"seed": 1)"); }), "<root>");
  EXPECT_EQ(config_error_path([] { profile_config("nope"); }), "profile");
}

TEST(Config, JsonRoundTripIsCanonical) {
  for (const auto& name : profile_names()) {
    RunConfig c = profile_config(name);
    c.seed = 12;
    c.ablations.no_novelty = true;
    const auto text = config_to_json(c);
    EXPECT_EQ(config_to_json(parse_config(text)), text) << name;
  }
}

TEST(Config, SkillCounts) {
  RunConfig c = profile_config("lightsout-cursor");
  EXPECT_EQ(c.skills(), 25);
  c.ablations.more_skills = true;
  EXPECT_EQ(c.skills(), 30);
  RunConfig t = profile_config("tileswap-cursor");
  EXPECT_EQ(t.skills(), 12);
  t.ablations.more_skills = true;
  EXPECT_EQ(t.skills(), 15);
  RunConfig f = profile_config("fast");
  EXPECT_EQ(f.skills(), 9);
}

TEST(Config, AblationsReachTheTrainingConfig) {
  RunConfig c = profile_config("lightsout-cursor");
  c.seed = 1;
  c.ablations.no_relabel = true;
  c.ablations.no_second_best = true;
  auto s = c.seads();
  EXPECT_FALSE(s.train.fm_relabel);
  EXPECT_FALSE(s.train.sac_relabel);
  EXPECT_FALSE(s.reward.second_best_norm);
  EXPECT_TRUE(s.reward.novelty_bonus);
  c.ablations = {};
  c.ablations.vic_discriminator = true;
  s = c.seads();
  EXPECT_TRUE(s.skill_model.discriminator);
  EXPECT_FALSE(s.reward.novelty_bonus);
  EXPECT_NO_THROW(s.validate());
}

TEST(CountSkills, OracleCoversEveryMove) {
  EnvConfig env;
  const ScriptedSkills skills(env);
  const auto r = count_skills(env, skills, 25, 20, 3);
  EXPECT_DOUBLE_EQ(r.mean_unique_moves, 25.0);
  EnvConfig tiles;
  tiles.game = GameSpec::tile_swap();
  EXPECT_DOUBLE_EQ(count_skills(tiles, ScriptedSkills(tiles), 12, 20, 3).mean_unique_moves, 12.0);
}

TEST(CountSkills, IdenticalSkillsCountOnce) {
  EnvConfig env;
  EXPECT_DOUBLE_EQ(count_skills(env, SameMove(env), 25, 10, 4).mean_unique_moves, 1.0);
}

TEST(CountSkills, MoreSkillsThanMovesNeverExceedsMoves) {
  EnvConfig env;
  const auto r = count_skills(env, ScriptedSkills(env), 30, 10, 5);
  for (int u : r.unique_moves) EXPECT_EQ(u, 25);
}

TEST(CountSkills, ParallelMatchesSerial) {
  EnvConfig env;
  const SameMove p(env);
  EXPECT_EQ(count_skills(env, p, 5, 12, 6, 5, true).unique_moves, count_skills(env, p, 5, 12, 6, 5, false).unique_moves);
}

TEST(EvalSuccess, OracleSolvesEveryTask) {
  for (const auto& spec : {GameSpec::lights_out(), GameSpec::tile_swap()}) {
    EnvConfig env;
    env.game = spec;
    const ScriptedSkills skills(env);
    const planning::GameSuccessors model(spec);
    const auto report = eval_success(env, skills, model, {}, false, 20, 7);
    ASSERT_EQ(report.tasks.size(), 100u);
    EXPECT_DOUBLE_EQ(report.success_rate(), 1.0);
    for (const auto& t : report.tasks) {
      EXPECT_EQ(solution_depth(parse_board(spec, t.board)), t.depth);
      EXPECT_EQ(split_of(parse_board(spec, t.board)), t.split);
      EXPECT_EQ(t.split, evaluation_split(spec, t.depth));
      EXPECT_EQ(t.result.skill_calls, t.depth);
    }
    for (const auto& d : report.depths) EXPECT_EQ(d.successes, 20);
  }
}

TEST(EvalSuccess, TileSwapDepthOneFallsBackToValidation) {
  EXPECT_EQ(evaluation_split(GameSpec::tile_swap(), 1), SplitLabel::val);
  EXPECT_EQ(evaluation_split(GameSpec::tile_swap(), 2), SplitLabel::test);
  EXPECT_EQ(evaluation_split(GameSpec::lights_out(), 1), SplitLabel::test);
}

TEST(EvalSuccess, TaskCsvIsReproducible) {
  EnvConfig env;
  const ScriptedSkills skills(env);
  const planning::GameSuccessors model(env.game);
  auto csv = [&](bool parallel) {
    std::ostringstream out;
    write_task_csv(out, eval_success(env, skills, model, {}, true, 4, 9, 3, parallel));
    return out.str();
  };
  const auto a = csv(true);
  EXPECT_EQ(a, csv(false));
  EXPECT_EQ(a, csv(true));
}

TEST(Baseline, EpisodeTruncatesAtStepLimit) {
  RunConfig c = profile_config("lightsout-cursor");
  c.seed = 1;
  EnvConfig env;
  Rng rng = make_stream(80, 0);
  sac::SacAgent agent(env.observation_dim(), Action::kDim, {3e-4, 0.005, 0.99, 0.01, 16, 2}, rng);
  auto& last = agent.actor().layers().back();
  last.weight.setZero();
  last.bias.setZero();
  last.bias(2) = -5.0;  // never trigger
  Rng brng = make_stream(80, 1);
  const EnvState start = reset(env, brng, generate_board(env.game, 3, brng, SplitLabel::test));
  sac::TransitionBuffer buffer(100);
  const auto ep = run_flat_episode(env, agent, start, 10 * 3, sac::ActMode::sample, rng, &buffer);
  EXPECT_FALSE(ep.solved);
  EXPECT_EQ(ep.steps, 30);
  ASSERT_EQ(buffer.size(), 30u);
  for (std::size_t i = 0; i < buffer.size(); ++i) EXPECT_EQ(buffer[i].reward, 0.0);
  EXPECT_TRUE(buffer[29].timeout);
  EXPECT_FALSE(buffer[29].terminal);
}

TEST(Baseline, RewardOnlyWhenTheGoalIsReached) {
  EnvConfig env;
  Rng rng = make_stream(81, 0);
  sac::SacAgent agent(env.observation_dim(), Action::kDim, {3e-4, 0.005, 0.99, 0.01, 16, 2}, rng);
  auto& last = agent.actor().layers().back();
  last.weight.setZero();
  last.bias.setZero();
  last.bias(2) = 5.0;  // trigger in place
  EnvState start;
  start.cursor = {0.5, 0.5};
  start.board = apply_move(goal_board(env.game), {2, 2});
  sac::TransitionBuffer buffer(10);
  const auto ep = run_flat_episode(env, agent, start, 10, sac::ActMode::deterministic, rng, &buffer);
  EXPECT_TRUE(ep.solved);
  EXPECT_EQ(ep.steps, 1);
  ASSERT_EQ(buffer.size(), 1u);
  EXPECT_EQ(buffer[0].reward, 1.0);
  EXPECT_TRUE(buffer[0].terminal);

  EnvState solved = start;
  solved.board = goal_board(env.game);
  const auto none = run_flat_episode(env, agent, solved, 10, sac::ActMode::deterministic, rng, &buffer);
  EXPECT_TRUE(none.solved);
  EXPECT_EQ(none.steps, 0);
  EXPECT_EQ(buffer.size(), 1u);
}

TEST(Metrics, NumbersRoundTrip) {
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(2.0), "2");
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456.789}) EXPECT_EQ(std::strtod(format_number(v).c_str(), nullptr), v);
  EXPECT_EQ(csv_row({"a", "b"}), "a,b");
}
