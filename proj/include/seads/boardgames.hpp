#pragma once

// Rules, symbolic mapping, board generation and dataset splits for the
// LightsOut and TileSwap board games.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "seads/rng.hpp"

namespace seads {

enum class GameKind { lights_out, tile_swap };

struct GameSpec {
  GameKind kind = GameKind::lights_out;
  int size = 5;  // LightsOut edge length; TileSwap is always 3

  static GameSpec lights_out(int n = 5) { return {GameKind::lights_out, n}; }
  static GameSpec tile_swap() { return {GameKind::tile_swap, 3}; }

  /// Length of the symbolic observation.
  int symbolic_dim() const { return kind == GameKind::lights_out ? size * size : 81; }
  int num_fields() const { return size * size; }

  friend bool operator==(const GameSpec&, const GameSpec&) = default;
};

std::string_view game_name(GameKind kind);
GameKind parse_game(std::string_view name);

struct LightsBoard {
  int n = 5;
  std::vector<std::uint8_t> cells;  // row-major, 0 = off, 1 = on

  static LightsBoard all_off(int n);
  std::uint8_t at(int row, int col) const { return cells[static_cast<std::size_t>(row * n + col)]; }

  friend bool operator==(const LightsBoard&, const LightsBoard&) = default;
};

struct TileBoard {
  std::array<std::uint8_t, 9> chips{};  // chips[field] = chip on that field

  static TileBoard identity();

  friend bool operator==(const TileBoard&, const TileBoard&) = default;
};

using Board = std::variant<LightsBoard, TileBoard>;

GameSpec spec_of(const Board& board);
bool is_goal(const Board& board);
Board goal_board(const GameSpec& spec);

/// A game move. LightsOut: (row, col) of the pushed field. TileSwap: the two
/// swapped fields with first < second.
struct GameMove {
  int first = 0;
  int second = 0;

  friend bool operator==(const GameMove&, const GameMove&) = default;
  friend auto operator<=>(const GameMove&, const GameMove&) = default;
};

class InvalidMove : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

LightsBoard lights_push(const LightsBoard& board, GameMove move);
TileBoard tiles_swap(const TileBoard& board, GameMove move);
Board apply_move(const Board& board, GameMove move);

/// All legal moves in canonical order (row-major fields for LightsOut,
/// lexicographic field pairs for TileSwap).
std::vector<GameMove> enumerate_moves(const GameSpec& spec);

/// Flat binary state abstraction of a board.
struct SymbolicObs {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits[i]; }

  friend bool operator==(const SymbolicObs&, const SymbolicObs&) = default;
};

struct SymbolicObsHash {
  std::size_t operator()(const SymbolicObs& obs) const noexcept;
};

SymbolicObs to_symbolic(const Board& board);
/// Inverse of to_symbolic; nullopt if `obs` encodes no valid board.
std::optional<Board> from_symbolic(const GameSpec& spec, const SymbolicObs& obs);

/// Minimal number of moves to the goal board by exhaustive breadth-first
/// search over boards; nullopt if the goal is unreachable.
std::optional<int> solution_depth(const Board& board);

enum class SplitLabel { train, val, test };

std::string_view split_name(SplitLabel split);
SplitLabel parse_split(std::string_view name);

/// Comma-separated integers, no whitespace, no trailing separator.
std::string serialize_board(const Board& board);
Board parse_board(const GameSpec& spec, std::string_view text);
std::uint32_t crc32_of(std::string_view bytes);
SplitLabel split_of(const Board& board);

/// All boards of solution depth 0..max_depth, found by breadth-first search
/// outward from the goal. Boards within a layer are in discovery order.
class BoardCatalog {
 public:
  static constexpr int kMaxDepth = 5;

  explicit BoardCatalog(const GameSpec& spec, int max_depth = kMaxDepth);

  const GameSpec& spec() const { return spec_; }
  int max_depth() const { return static_cast<int>(layers_.size()) - 1; }
  const std::vector<Board>& boards(int depth) const;
  std::size_t count(int depth, std::optional<SplitLabel> split = std::nullopt) const;
  /// Depth if it is at most max_depth(), else nullopt.
  std::optional<int> depth_of(const Board& board) const;

 private:
  GameSpec spec_;
  std::vector<std::vector<Board>> layers_;
  std::vector<std::vector<std::uint64_t>> layer_codes_;  // sorted, for lookup
};

/// Process-wide cached catalog (thread-safe initialization).
const BoardCatalog& catalog_for(const GameSpec& spec);

std::size_t count_boards(const GameSpec& spec, int depth);

class BoardGenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Random board of solution depth `depth` (1..5) belonging to `split`.
/// Throws BoardGenerationError when no such board is found within
/// `max_attempts` draws.
Board generate_board(const GameSpec& spec, int depth, Rng& rng, SplitLabel split,
                     int max_attempts = 20000);

// Board-set export: one `<game>,<depth>,<split>,<serialized-board>` line per board.
struct BoardSetEntry {
  GameKind game = GameKind::lights_out;
  int depth = 0;
  SplitLabel split = SplitLabel::train;
  Board board;
};

std::string format_board_set_line(const BoardSetEntry& entry);
BoardSetEntry parse_board_set_line(const GameSpec& spec, std::string_view line);
/// Writes every catalog board of the given depths; returns number of lines.
std::size_t write_board_set(std::ostream& out, const GameSpec& spec, std::span<const int> depths);

}  // namespace seads
