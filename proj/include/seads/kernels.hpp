#pragma once

// Data-parallel kernels (OpenMP) and the serial reference implementations
// they are tested and benchmarked against. Parallel and serial variants
// return identical results.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "seads/boardgames.hpp"
#include "seads/embedding.hpp"
#include "seads/skill_model.hpp"

namespace seads::kernels {

/// How training episodes are drawn: board depth ~ U{1..max_depth} from the
/// train split, skill ~ U{0..K-1}, uniform cursor start.
struct EpisodeSource {
  EnvConfig env;
  int num_skills = 1;
  int max_depth = 5;
  std::uint64_t seed = 0;
};

/// Episode `index` uses its own RNG stream, so results do not depend on the
/// order in which episodes are collected.
EpisodeRecord collect_one(const EpisodeSource& source, const SkillPolicy& policy, std::uint64_t index);
std::vector<EpisodeRecord> collect_episodes(const EpisodeSource& source, const SkillPolicy& policy,
                                            std::uint64_t first_index, int count);
std::vector<EpisodeRecord> collect_episodes_serial(const EpisodeSource& source, const SkillPolicy& policy,
                                                   std::uint64_t first_index, int count);

/// Skill scores for many pairs, batched and split across threads.
skills::SkillScores score_pairs(const skills::SkillModel& model, std::span<const skills::SymbolicPair> pairs);
/// One unbatched likelihood evaluation per (pair, skill).
skills::SkillScores score_pairs_serial(const skills::ForwardModel& model, std::span<const skills::SymbolicPair> pairs);

/// Boards per split label (train, val, test).
std::array<std::size_t, 3> split_counts(std::span<const Board> boards);
std::array<std::size_t, 3> split_counts_serial(std::span<const Board> boards);

int max_threads();

}  // namespace seads::kernels
