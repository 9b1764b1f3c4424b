#pragma once

// Cursor manipulator embedding a board game: the agent moves a cursor on the
// unit square and triggers game moves at the cursor position.

#include <array>
#include <optional>
#include <vector>

#include "seads/boardgames.hpp"
#include "seads/rng.hpp"

namespace seads {

struct CursorState {
  double x = 0.5;
  double y = 0.5;

  friend bool operator==(const CursorState&, const CursorState&) = default;
};

struct EnvState {
  CursorState cursor;
  Board board;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

/// Raw policy output: displacement in x and y, and a trigger value.
struct Action {
  double dx = 0.0;
  double dy = 0.0;
  double trigger = -1.0;

  static constexpr int kDim = 3;
  std::array<double, kDim> as_array() const { return {dx, dy, trigger}; }
  static Action from(const double* v) { return {v[0], v[1], v[2]}; }

  friend bool operator==(const Action&, const Action&) = default;
};

struct EnvConfig {
  GameSpec game = GameSpec::lights_out();
  double max_displacement = 0.2;
  int step_limit = 10;
  double trigger_threshold = 0.0;
  /// Half-diagonal of a TileSwap swap rhombus, as a fraction of the field edge.
  double swap_region_ratio = 0.25;

  void validate() const;
  /// Policy observation length: cursor (x, y) followed by the symbolic bits.
  int observation_dim() const { return 2 + game.symbolic_dim(); }
};

struct StepResult {
  EnvState next_state;
  bool symbolic_changed = false;
  int steps_taken = 1;
  std::optional<GameMove> move;  // triggered game move, if any
};

EnvState reset(const EnvConfig& config, Rng& rng, Board board);
StepResult step(const EnvState& state, const Action& action, const EnvConfig& config);

/// The game move a trigger at `cursor` would attempt, if any.
std::optional<GameMove> move_at(const EnvConfig& config, const CursorState& cursor);

/// (x, y, z-bits) as doubles.
std::vector<double> observe(const EnvState& state);

/// Skill-conditioned low-level controller pi(a | s, k).
class SkillPolicy {
 public:
  virtual ~SkillPolicy() = default;
  virtual Action act(const EnvState& state, int skill, Rng& rng) const = 0;
};

enum class TerminationCause { symbolic_change, step_limit };

struct EpisodeRecord {
  std::vector<EnvState> states;  // s_0 .. s_T
  std::vector<Action> actions;   // a_0 .. a_{T-1}
  int skill = 0;                 // 0-based
  SymbolicObs z0;
  SymbolicObs zT;
  TerminationCause cause = TerminationCause::step_limit;
  std::optional<GameMove> first_move;

  int length() const { return static_cast<int>(actions.size()); }
  bool changed() const { return z0 != zT; }
};

struct SkillRollout {
  EnvState terminal;
  EpisodeRecord episode;
};

/// Runs `policy` for skill `skill` from `state` until the symbolic state
/// changes or the step limit is hit.
SkillRollout apply_skill(const EnvConfig& config, const SkillPolicy& policy, const EnvState& state, int skill,
                         Rng& rng);

}  // namespace seads
