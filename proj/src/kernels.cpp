#include "seads/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>

namespace seads::kernels {

namespace {

constexpr std::uint64_t kEpisodeStreamBase = 0x100000000ull;
constexpr std::size_t kPairsPerChunk = 128;

// Runs body(i) for i in [0, n) across threads; rethrows the first exception.
template <class F>
void parallel_for(std::int64_t n, F&& body) {
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(seads_kernel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

EpisodeRecord collect_one(const EpisodeSource& source, const SkillPolicy& policy, std::uint64_t index) {
  Rng rng = make_stream(source.seed, kEpisodeStreamBase + index);
  const int depth = uniform_int(rng, 1, source.max_depth);
  Board board = generate_board(source.env.game, depth, rng, SplitLabel::train);
  const int skill = uniform_int(rng, 0, source.num_skills - 1);
  const EnvState start = reset(source.env, rng, std::move(board));
  return apply_skill(source.env, policy, start, skill, rng).episode;
}

std::vector<EpisodeRecord> collect_episodes(const EpisodeSource& source, const SkillPolicy& policy,
                                            std::uint64_t first_index, int count) {
  std::vector<EpisodeRecord> out(static_cast<std::size_t>(count));
  parallel_for(count, [&](std::int64_t i) {
    out[static_cast<std::size_t>(i)] = collect_one(source, policy, first_index + static_cast<std::uint64_t>(i));
  });
  return out;
}

std::vector<EpisodeRecord> collect_episodes_serial(const EpisodeSource& source, const SkillPolicy& policy,
                                                   std::uint64_t first_index, int count) {
  std::vector<EpisodeRecord> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(collect_one(source, policy, first_index + static_cast<std::uint64_t>(i)));
  return out;
}

skills::SkillScores score_pairs(const skills::SkillModel& model, std::span<const skills::SymbolicPair> pairs) {
  const std::size_t chunks = (pairs.size() + kPairsPerChunk - 1) / kPairsPerChunk;
  if (chunks <= 1 || max_threads() == 1) return model.score(pairs);
  const auto n = static_cast<Eigen::Index>(pairs.size());
  const int k = model.num_skills();
  skills::SkillScores out;
  out.log_posterior.resize(n, k);
  if (model.has_likelihood()) out.log_likelihood.resize(n, k);
  parallel_for(static_cast<std::int64_t>(chunks), [&](std::int64_t c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kPairsPerChunk;
    const std::size_t len = std::min(kPairsPerChunk, pairs.size() - begin);
    const auto part = model.score(pairs.subspan(begin, len));
    const auto b = static_cast<Eigen::Index>(begin);
    const auto l = static_cast<Eigen::Index>(len);
    out.log_posterior.middleRows(b, l) = part.log_posterior;
    if (model.has_likelihood()) out.log_likelihood.middleRows(b, l) = part.log_likelihood;
  });
  return out;
}

skills::SkillScores score_pairs_serial(const skills::ForwardModel& model, std::span<const skills::SymbolicPair> pairs) {
  const auto n = static_cast<Eigen::Index>(pairs.size());
  const int num_skills = model.num_skills();
  skills::SkillScores out{nn::Matrix(n, num_skills), nn::Matrix(n, num_skills)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pr = pairs[static_cast<std::size_t>(i)];
    for (int k = 0; k < num_skills; ++k)
      out.log_likelihood(i, k) = model.log_prob({*pr.z0, k, *pr.zT});
    const double m = out.log_likelihood.row(i).maxCoeff();
    double sum = 0.0;
    for (int k = 0; k < num_skills; ++k) sum += std::exp(out.log_likelihood(i, k) - m);
    out.log_posterior.row(i) = out.log_likelihood.row(i).array() - (m + std::log(sum));
  }
  return out;
}

std::array<std::size_t, 3> split_counts(std::span<const Board> boards) {
  std::size_t train = 0, val = 0, test = 0;
  const auto n = static_cast<std::int64_t>(boards.size());
#pragma omp parallel for reduction(+ : train, val, test) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    switch (split_of(boards[static_cast<std::size_t>(i)])) {
      case SplitLabel::train: ++train; break;
      case SplitLabel::val: ++val; break;
      case SplitLabel::test: ++test; break;
    }
  }
  return {train, val, test};
}

std::array<std::size_t, 3> split_counts_serial(std::span<const Board> boards) {
  std::array<std::size_t, 3> counts{};
  for (const auto& b : boards) ++counts[static_cast<std::size_t>(split_of(b))];
  return counts;
}

}  // namespace seads::kernels
