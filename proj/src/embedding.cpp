#include "seads/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seads {

void EnvConfig::validate() const {
  if (step_limit < 1) throw std::invalid_argument("env.step_limit must be >= 1");
  if (!(max_displacement > 0.0)) throw std::invalid_argument("env.max_displacement must be > 0");
  if (!(swap_region_ratio > 0.0) || swap_region_ratio > 0.5)
    throw std::invalid_argument("env.swap_region_ratio must be in (0, 0.5]");
  if (game.kind == GameKind::tile_swap && game.size != 3) throw std::invalid_argument("TileSwap board is 3x3");
}

EnvState reset(const EnvConfig& config, Rng& rng, Board board) {
  if (spec_of(board) != config.game) throw std::invalid_argument("reset: board does not match the configured game");
  CursorState cursor;
  cursor.x = uniform01(rng);
  cursor.y = uniform01(rng);
  return EnvState{cursor, std::move(board)};
}

std::optional<GameMove> move_at(const EnvConfig& config, const CursorState& cursor) {
  const int n = config.game.size;
  if (config.game.kind == GameKind::lights_out) {
    const int col = std::min(static_cast<int>(std::floor(cursor.x * n)), n - 1);
    const int row = std::min(static_cast<int>(std::floor(cursor.y * n)), n - 1);
    return GameMove{row, col};
  }
  const double edge = 1.0 / 3.0;
  const double half_diag = config.swap_region_ratio * edge;
  for (const auto& mv : enumerate_moves(config.game)) {
    const int ra = mv.first / 3, ca = mv.first % 3;
    const int rb = mv.second / 3, cb = mv.second % 3;
    // midpoint of the shared edge, in (x = column, y = row) coordinates
    const double cx = 0.5 * (ca + cb + 1) * edge;
    const double cy = 0.5 * (ra + rb + 1) * edge;
    if (std::abs(cursor.x - cx) + std::abs(cursor.y - cy) <= half_diag) return mv;
  }
  return std::nullopt;
}

StepResult step(const EnvState& state, const Action& action, const EnvConfig& config) {
  StepResult result{state, false, 1, std::nullopt};
  auto& cursor = result.next_state.cursor;
  const double dx = std::clamp(action.dx, -1.0, 1.0);
  const double dy = std::clamp(action.dy, -1.0, 1.0);
  cursor.x = std::clamp(cursor.x + config.max_displacement * dx, 0.0, 1.0);
  cursor.y = std::clamp(cursor.y + config.max_displacement * dy, 0.0, 1.0);

  const double trigger = std::clamp(action.trigger, -1.0, 1.0);
  if (trigger > config.trigger_threshold) {
    if (auto mv = move_at(config, cursor)) {
      result.next_state.board = apply_move(state.board, *mv);
      result.move = mv;
      result.symbolic_changed = result.next_state.board != state.board;
    }
  }
  return result;
}

std::vector<double> observe(const EnvState& state) {
  const auto z = to_symbolic(state.board);
  std::vector<double> obs;
  obs.reserve(2 + z.size());
  obs.push_back(state.cursor.x);
  obs.push_back(state.cursor.y);
  for (auto b : z.bits) obs.push_back(b);
  return obs;
}

SkillRollout apply_skill(const EnvConfig& config, const SkillPolicy& policy, const EnvState& state, int skill,
                         Rng& rng) {
  EpisodeRecord ep;
  ep.skill = skill;
  ep.z0 = to_symbolic(state.board);
  ep.states.push_back(state);
  EnvState current = state;
  for (int t = 0; t < config.step_limit; ++t) {
    const Action a = policy.act(current, skill, rng);
    StepResult r = step(current, a, config);
    ep.actions.push_back(a);
    ep.states.push_back(r.next_state);
    current = std::move(r.next_state);
    if (r.symbolic_changed) {
      ep.cause = TerminationCause::symbolic_change;
      ep.first_move = r.move;
      break;
    }
  }
  ep.zT = to_symbolic(current.board);
  return {std::move(current), std::move(ep)};
}

}  // namespace seads
