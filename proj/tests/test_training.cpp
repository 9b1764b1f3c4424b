#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "seads/checkpoint.hpp"
#include "seads/kernels.hpp"
#include "seads/metrics.hpp"
#include "seads/training.hpp"

using namespace seads;

namespace {

RewardConfig reward_config(int k, bool second_best, bool novelty) { return {k, second_best, novelty}; }

RunConfig tiny_run(std::uint64_t seed) {
  RunConfig c = profile_config("fast");
  c.seed = seed;
  c.train.env_steps = 600;
  c.train.long_buffer = 128;
  c.train.recent_buffer = 64;
  c.train.sample_size = 32;
  c.train.sac_batch = 32;
  c.train.sac_updates = 4;
  c.sac.hidden = 16;
  c.skill_model.hidden = 16;
  return c;
}

EpisodeRecord fake_episode(int skill, bool change, int length) {
  EpisodeRecord e;
  e.skill = skill;
  e.z0 = SymbolicObs{{0, 0}};
  e.zT = change ? SymbolicObs{{1, 0}} : e.z0;
  for (int t = 0; t <= length; ++t) {
    EnvState s;
    s.cursor = {0.1 * t, 0.5};
    s.board = LightsBoard{1, {static_cast<std::uint8_t>(change && t == length)}};
    e.states.push_back(s);
  }
  e.actions.assign(static_cast<std::size_t>(length), Action{0.1, 0.0, -1.0});
  e.cause = change ? TerminationCause::symbolic_change : TerminationCause::step_limit;
  return e;
}

}  // namespace

TEST(Reward, UniformPosteriorGivesZero) {
  const int k = 9;
  std::vector<double> post(k, -std::log(9.0));
  EXPECT_NEAR(reward_from_scores(post, {}, 3, reward_config(k, true, false)), 0.0, 1e-15);
  EXPECT_NEAR(reward_from_scores(post, {}, 3, reward_config(k, false, false)), 0.0, 1e-15);
}

TEST(Reward, SecondBestNormalizationAndClipFloor) {
  // posterior (0.8, 0.2, ~0, ~0)
  std::vector<double> post{std::log(0.8), std::log(0.2), -1e6, -1e6};
  const auto cfg = reward_config(4, true, false);
  EXPECT_NEAR(reward_from_scores(post, {}, 0, cfg), std::log(4.0), 1e-12);
  // the runner-up is compared with itself
  EXPECT_NEAR(reward_from_scores(post, {}, 1, cfg), 0.0, 1e-12);
  // unlikely skills are floored at -2 ln K
  EXPECT_NEAR(reward_from_scores(post, {}, 2, cfg), -2 * std::log(4.0) - std::log(0.2), 1e-12);
  EXPECT_NEAR(reward_from_scores(post, {}, 0, reward_config(4, false, false)), std::log(0.8) + std::log(4.0), 1e-12);
}

TEST(Reward, NoveltyBonusSubtractsBestLikelihood) {
  std::vector<double> post{std::log(0.5), std::log(0.5)};
  std::vector<double> lik{-3.0, -7.0};
  EXPECT_NEAR(reward_from_scores(post, lik, 0, reward_config(2, true, true)), 3.0, 1e-12);
  EXPECT_THROW(reward_from_scores(post, {}, 0, reward_config(2, true, true)), std::invalid_argument);
  EXPECT_THROW(reward_from_scores(post, lik, 2, reward_config(2, true, true)), std::out_of_range);
}

TEST(Relabel, SwapsTwoMislabelledEpisodes) {
  nn::Matrix post(2, 2);
  post << std::log(0.1), std::log(0.9), std::log(0.9), std::log(0.1);
  const std::vector<int> skills{0, 1};
  const std::vector<char> all{1, 1};
  EXPECT_EQ(constrained_relabel(post, skills, all), (std::vector<int>{1, 0}));
}

TEST(Relabel, RepeatedLabelsCannotChange) {
  nn::Matrix post(2, 2);
  post << std::log(0.9), std::log(0.1), std::log(0.9), std::log(0.1);
  EXPECT_EQ(constrained_relabel(post, std::vector<int>{1, 1}, std::vector<char>{1, 1}), (std::vector<int>{1, 1}));
}

TEST(Relabel, MatchesBruteForceAndPreservesMultiset) {
  Rng rng = make_stream(60, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = uniform_int(rng, 1, 8);
    const int k = uniform_int(rng, 2, 5);
    nn::Matrix logits(n, k);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = 3.0 * standard_normal(rng);
    const nn::Matrix post = skills::log_normalize_rows(logits);
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) labels.push_back(uniform_int(rng, 0, k - 1));
    const auto out = constrained_relabel(post, labels, std::vector<char>(static_cast<std::size_t>(n), 1));
    double score = 0.0;
    for (int i = 0; i < n; ++i) score += post(i, out[static_cast<std::size_t>(i)]);
    EXPECT_NEAR(score, oracle::brute_force_relabel_score(post, labels), 1e-9);
    auto a = labels, b = out;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
}

TEST(Relabel, IneligibleRowsKeepLabels) {
  nn::Matrix post(3, 3);
  post << -5, -0.01, -5, -0.01, -5, -5, -5, -5, -0.01;
  const auto out = constrained_relabel(post, std::vector<int>{0, 1, 2}, std::vector<char>{1, 0, 1});
  EXPECT_EQ(out[1], 1);
  EXPECT_EQ(out, (std::vector<int>{0, 1, 2}));  // rows 0 and 2 can only trade labels 0 and 2
}

TEST(Relabel, UnchangedEpisodesAreNeverEligible) {
  std::vector<EpisodeRecord> eps{fake_episode(0, false, 10), fake_episode(1, true, 3), fake_episode(0, true, 2)};
  std::vector<const EpisodeRecord*> ptrs;
  for (const auto& e : eps) ptrs.push_back(&e);
  nn::Matrix post(3, 2);
  post << std::log(0.01), std::log(0.99), std::log(0.99), std::log(0.01), std::log(0.01), std::log(0.99);
  Rng rng = make_stream(61, 0);
  const auto outcome = relabel(ptrs, post, 1.0, rng);
  EXPECT_EQ(outcome.eligible, (std::vector<char>{0, 1, 1}));
  EXPECT_EQ(outcome.skills, (std::vector<int>{0, 0, 1}));
  const auto none = relabel(ptrs, post, 0.0, rng);
  EXPECT_EQ(none.skills, (std::vector<int>{0, 1, 0}));
}

TEST(EpisodeBuffers, FifoEvictionAndTrainingSet) {
  EpisodeBuffers buf(4, 2);
  for (int i = 0; i < 6; ++i) buf.add(std::make_shared<EpisodeRecord>(fake_episode(i, true, 1)));
  ASSERT_EQ(buf.long_term().size(), 4u);
  ASSERT_EQ(buf.recent().size(), 2u);
  EXPECT_EQ(buf.long_term().front()->skill, 2);
  EXPECT_EQ(buf.recent().front()->skill, 4);
  Rng rng = make_stream(62, 0);
  const auto set = buf.training_set(3, rng);
  ASSERT_EQ(set.size(), 5u);
  EXPECT_EQ(set[3]->skill, 4);
  EXPECT_EQ(set[4]->skill, 5);
  std::vector<int> sampled{set[0]->skill, set[1]->skill, set[2]->skill};
  std::sort(sampled.begin(), sampled.end());
  EXPECT_EQ(std::adjacent_find(sampled.begin(), sampled.end()), sampled.end());  // without replacement
  EXPECT_EQ(buf.training_set(100, rng).size(), 6u);
}

TEST(EpisodeTransitions, RewardOnlyOnFinalTransition) {
  const auto change = fake_episode(1, true, 3);
  const auto ts = episode_transitions(change, 0, 2, 1.5);
  ASSERT_EQ(ts.size(), 3u);
  EXPECT_EQ(ts[0].reward, 0.0);
  EXPECT_EQ(ts[2].reward, 1.5);
  EXPECT_TRUE(ts[2].terminal);
  EXPECT_FALSE(ts[1].terminal);
  EXPECT_EQ(ts[0].state.size(), 2u + 1u + 2u);
  EXPECT_EQ(ts[0].state[3], 1.0);  // relabelled one-hot
  const auto timeout = episode_transitions(fake_episode(0, false, 10), 1, 2, -0.5);
  EXPECT_FALSE(timeout.back().terminal);
  EXPECT_TRUE(timeout.back().timeout);
}

TEST(Trainer, OneEpochFillsBuffersAndCountsSteps) {
  SeadsTrainer trainer(tiny_run(3).seads());
  const auto m = trainer.train_epoch();
  EXPECT_EQ(m.recent_buffer, 32u);
  EXPECT_EQ(m.long_buffer, 32u);
  std::int64_t steps = 0;
  for (const auto& e : trainer.buffers().recent()) {
    steps += e->length();
    EXPECT_GE(e->length(), 1);
    EXPECT_LE(e->length(), 10);
  }
  EXPECT_EQ(m.env_steps, steps);
  EXPECT_EQ(trainer.env_steps(), steps);
  EXPECT_TRUE(std::isfinite(m.fm_nll));
}

TEST(Trainer, SameSeedSameMetrics) {
  auto run = [](std::uint64_t seed) {
    SeadsTrainer t(tiny_run(seed).seads());
    std::string csv;
    t.train([&](const EpochMetrics& m) { csv += epoch_csv_row(m) + "\n"; });
    return csv;
  };
  const auto a = run(5);
  EXPECT_EQ(a, run(5));
  EXPECT_NE(a, run(6));
}

TEST(Kernels, ParallelCollectMatchesSerial) {
  const auto cfg = tiny_run(7).seads();
  SeadsTrainer trainer(cfg);
  const SkillAgentPolicy policy(trainer.agent(), cfg.num_skills, sac::ActMode::sample);
  const kernels::EpisodeSource src{cfg.env, cfg.num_skills, 5, 7};
  const auto par = kernels::collect_episodes(src, policy, 10, 24);
  const auto ser = kernels::collect_episodes_serial(src, policy, 10, 24);
  ASSERT_EQ(par.size(), ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    EXPECT_EQ(par[i].states, ser[i].states);
    EXPECT_EQ(par[i].actions, ser[i].actions);
    EXPECT_EQ(par[i].skill, ser[i].skill);
  }
}

TEST(Kernels, BatchedScoresMatchSerialReference) {
  Rng rng = make_stream(63, 0);
  const skills::ForwardModel fm(9, 9, rng, 16);
  std::vector<SymbolicObs> states;
  for (int i = 0; i < 600; ++i) {
    SymbolicObs z;
    for (int d = 0; d < 9; ++d) z.bits.push_back(static_cast<std::uint8_t>(uniform_int(rng, 0, 1)));
    states.push_back(z);
  }
  std::vector<skills::SymbolicPair> pairs;
  for (int i = 0; i + 1 < 600; i += 2) pairs.push_back({&states[static_cast<std::size_t>(i)], &states[static_cast<std::size_t>(i + 1)]});
  const auto a = kernels::score_pairs(fm, pairs);
  const auto b = kernels::score_pairs_serial(fm, pairs);
  EXPECT_LT((a.log_posterior - b.log_posterior).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((a.log_likelihood - b.log_likelihood).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  const auto cfg = tiny_run(8);
  SeadsTrainer trainer(cfg.seads());
  for (int i = 0; i < 3; ++i) trainer.train_epoch();
  const auto bytes = checkpoint_bytes(cfg, trainer);
  const auto back = checkpoint_from_bytes(bytes);
  EXPECT_EQ(checkpoint_bytes(back.config, *back.trainer), bytes);
  EXPECT_EQ(config_to_json(back.config), config_to_json(cfg));

  Rng rng = make_stream(64, 0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> s;
    for (int d = 0; d < trainer.agent().state_dim(); ++d) s.push_back(uniform01(rng));
    Rng r1 = make_stream(65, static_cast<std::uint64_t>(i)), r2 = r1;
    EXPECT_EQ(trainer.agent().act(s, sac::ActMode::deterministic, r1),
              back.trainer->agent().act(s, sac::ActMode::deterministic, r2));
  }
}

TEST(Checkpoint, RejectsCorruptInput) {
  const auto cfg = tiny_run(9);
  SeadsTrainer trainer(cfg.seads());
  trainer.train_epoch();
  const auto bytes = checkpoint_bytes(cfg, trainer);
  EXPECT_THROW(checkpoint_from_bytes(bytes.substr(0, bytes.size() / 2)), std::exception);
  EXPECT_THROW(checkpoint_from_bytes(bytes + "x"), std::exception);
  auto wrong_version = bytes;
  wrong_version[8] = static_cast<char>(kCheckpointVersion + 1);
  EXPECT_THROW(checkpoint_from_bytes(wrong_version), std::exception);
  auto wrong_magic = bytes;
  wrong_magic[0] = 'X';
  EXPECT_THROW(checkpoint_from_bytes(wrong_magic), std::exception);
}

TEST(Checkpoint, ResumeReproducesUninterruptedRun) {
  const auto cfg = tiny_run(10);
  SeadsTrainer full(cfg.seads());
  std::vector<std::string> rows;
  full.train([&](const EpochMetrics& m) { rows.push_back(epoch_csv_row(m)); });
  ASSERT_GT(rows.size(), 4u);

  SeadsTrainer first(cfg.seads());
  std::vector<std::string> resumed;
  for (int i = 0; i < 3; ++i) resumed.push_back(epoch_csv_row(first.train_epoch()));
  auto restored = checkpoint_from_bytes(checkpoint_bytes(cfg, first));
  restored.trainer->train([&](const EpochMetrics& m) { resumed.push_back(epoch_csv_row(m)); });
  EXPECT_EQ(resumed, rows);
}

TEST(Reward, OnlyTheArgmaxIsPositive) {
  Rng rng = make_stream(66, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = uniform_int(rng, 2, 8);
    nn::Matrix logits(1, k);
    for (int j = 0; j < k; ++j) logits(0, j) = 4.0 * standard_normal(rng);
    const nn::Matrix post = skills::log_normalize_rows(logits);
    const std::vector<double> row(post.data(), post.data() + k);
    Eigen::Index best;
    post.row(0).maxCoeff(&best);
    for (int j = 0; j < k; ++j) {
      const double r = reward_from_scores(row, {}, j, reward_config(k, true, false));
      if (j == best) EXPECT_GT(r, 0.0);
      else EXPECT_LE(r, 0.0);
    }
  }
}

TEST(Reward, ClipFloorBindsForTwoSkills) {
  // -2 ln 2 > ln 0.2, so the runner-up is clipped
  const std::vector<double> post{std::log(0.8), std::log(0.2)};
  EXPECT_NEAR(reward_from_scores(post, {}, 0, reward_config(2, true, false)), std::log(0.8) + 2 * std::log(2.0), 1e-15);
  EXPECT_EQ(reward_from_scores(post, {}, 1, reward_config(2, true, false)), 0.0);
}

TEST(Relabel, LogPosteriorMatrixExample) {
  nn::Matrix q(2, 2);
  q << 0.0, -1.0, -1.0, 0.0;
  EXPECT_EQ(constrained_relabel(q, std::vector<int>{1, 0}, std::vector<char>{1, 1}), (std::vector<int>{0, 1}));
  EXPECT_EQ(constrained_relabel(q, std::vector<int>{0, 1}, std::vector<char>{1, 1}), (std::vector<int>{0, 1}));
  EXPECT_EQ(constrained_relabel(q, std::vector<int>{0, 1}, std::vector<char>{0, 0}), (std::vector<int>{0, 1}));
}

TEST(Reward, UniformForwardModelGivesZeroBaseReward) {
  Rng rng = make_stream(67, 0);
  skills::ForwardModel fm(9, 9, rng, 8);
  for (auto& l : fm.network().layers()) {
    l.weight.setZero();
    l.bias.setZero();
  }
  const SymbolicObs z0{{0, 1, 0, 0, 1, 0, 0, 0, 1}}, zT{{1, 1, 0, 0, 1, 0, 0, 1, 1}};
  for (int k = 0; k < 9; ++k) EXPECT_EQ(compute_reward(z0, zT, k, fm, reward_config(9, true, false)), 0.0);
}
