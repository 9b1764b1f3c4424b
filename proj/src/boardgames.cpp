#include "seads/boardgames.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <unordered_set>

namespace seads {

namespace {

constexpr int kTileFields = 9;
constexpr int kMaxLightsSearchSize = 5;

void check_lights_size(int n) {
  if (n < 1 || n > 8) throw std::invalid_argument("LightsOut board size must be in [1, 8]");
}

// Board <-> integer code. LightsOut: bit (row * n + col). TileSwap: chip of
// field f in bits [4f, 4f + 4).
std::uint64_t encode(const Board& board) {
  if (const auto* lights = std::get_if<LightsBoard>(&board)) {
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < lights->cells.size(); ++i)
      if (lights->cells[i]) code |= std::uint64_t{1} << i;
    return code;
  }
  const auto& tiles = std::get<TileBoard>(board);
  std::uint64_t code = 0;
  for (int f = 0; f < kTileFields; ++f) code |= std::uint64_t{tiles.chips[f]} << (4 * f);
  return code;
}

Board decode(const GameSpec& spec, std::uint64_t code) {
  if (spec.kind == GameKind::lights_out) {
    LightsBoard board = LightsBoard::all_off(spec.size);
    for (std::size_t i = 0; i < board.cells.size(); ++i) board.cells[i] = (code >> i) & 1u;
    return board;
  }
  TileBoard board;
  for (int f = 0; f < kTileFields; ++f) board.chips[f] = static_cast<std::uint8_t>((code >> (4 * f)) & 0xFu);
  return board;
}

std::vector<std::uint64_t> push_masks(int n) {
  std::vector<std::uint64_t> masks;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      std::uint64_t m = std::uint64_t{1} << (r * n + c);
      if (r > 0) m |= std::uint64_t{1} << ((r - 1) * n + c);
      if (r + 1 < n) m |= std::uint64_t{1} << ((r + 1) * n + c);
      if (c > 0) m |= std::uint64_t{1} << (r * n + c - 1);
      if (c + 1 < n) m |= std::uint64_t{1} << (r * n + c + 1);
      masks.push_back(m);
    }
  return masks;
}

std::uint64_t swap_code(std::uint64_t code, GameMove move) {
  const int a = 4 * move.first;
  const int b = 4 * move.second;
  const std::uint64_t ca = (code >> a) & 0xFu;
  const std::uint64_t cb = (code >> b) & 0xFu;
  code &= ~((std::uint64_t{0xF} << a) | (std::uint64_t{0xF} << b));
  return code | (ca << b) | (cb << a);
}

// Neighbour generator on codes, in canonical move order.
class CodeGraph {
 public:
  explicit CodeGraph(const GameSpec& spec) : spec_(spec), moves_(enumerate_moves(spec)) {
    if (spec.kind == GameKind::lights_out) masks_ = push_masks(spec.size);
  }

  template <class F>
  void for_each_neighbor(std::uint64_t code, F&& f) const {
    if (spec_.kind == GameKind::lights_out) {
      for (auto m : masks_) f(code ^ m);
    } else {
      for (const auto& mv : moves_) f(swap_code(code, mv));
    }
  }

 private:
  GameSpec spec_;
  std::vector<GameMove> moves_;
  std::vector<std::uint64_t> masks_;
};

bool adjacent_fields(int a, int b) {
  if (a < 0 || b < 0 || a >= kTileFields || b >= kTileFields) return false;
  const int ra = a / 3, ca = a % 3, rb = b / 3, cb = b % 3;
  return std::abs(ra - rb) + std::abs(ca - cb) == 1;
}

}  // namespace

std::string_view game_name(GameKind kind) {
  return kind == GameKind::lights_out ? "lightsout" : "tileswap";
}

GameKind parse_game(std::string_view name) {
  if (name == "lightsout") return GameKind::lights_out;
  if (name == "tileswap") return GameKind::tile_swap;
  throw std::invalid_argument("unknown game '" + std::string(name) + "' (expected lightsout|tileswap)");
}

LightsBoard LightsBoard::all_off(int n) {
  check_lights_size(n);
  return LightsBoard{n, std::vector<std::uint8_t>(static_cast<std::size_t>(n * n), 0)};
}

TileBoard TileBoard::identity() {
  TileBoard board;
  std::iota(board.chips.begin(), board.chips.end(), std::uint8_t{0});
  return board;
}

GameSpec spec_of(const Board& board) {
  if (const auto* lights = std::get_if<LightsBoard>(&board)) return GameSpec::lights_out(lights->n);
  return GameSpec::tile_swap();
}

Board goal_board(const GameSpec& spec) {
  if (spec.kind == GameKind::lights_out) return LightsBoard::all_off(spec.size);
  return TileBoard::identity();
}

bool is_goal(const Board& board) { return board == goal_board(spec_of(board)); }

LightsBoard lights_push(const LightsBoard& board, GameMove move) {
  const int n = board.n;
  const int r = move.first, c = move.second;
  if (r < 0 || c < 0 || r >= n || c >= n)
    throw InvalidMove("LightsOut push (" + std::to_string(r) + "," + std::to_string(c) + ") out of bounds");
  LightsBoard out = board;
  auto toggle = [&](int rr, int cc) {
    if (rr >= 0 && cc >= 0 && rr < n && cc < n) out.cells[static_cast<std::size_t>(rr * n + cc)] ^= 1u;
  };
  toggle(r, c);
  toggle(r - 1, c);
  toggle(r + 1, c);
  toggle(r, c - 1);
  toggle(r, c + 1);
  return out;
}

TileBoard tiles_swap(const TileBoard& board, GameMove move) {
  if (!adjacent_fields(move.first, move.second))
    throw InvalidMove("TileSwap fields " + std::to_string(move.first) + " and " + std::to_string(move.second) +
                      " are not adjacent");
  TileBoard out = board;
  std::swap(out.chips[static_cast<std::size_t>(move.first)], out.chips[static_cast<std::size_t>(move.second)]);
  return out;
}

Board apply_move(const Board& board, GameMove move) {
  if (const auto* lights = std::get_if<LightsBoard>(&board)) return lights_push(*lights, move);
  return tiles_swap(std::get<TileBoard>(board), move);
}

std::vector<GameMove> enumerate_moves(const GameSpec& spec) {
  std::vector<GameMove> moves;
  if (spec.kind == GameKind::lights_out) {
    for (int r = 0; r < spec.size; ++r)
      for (int c = 0; c < spec.size; ++c) moves.push_back({r, c});
    return moves;
  }
  for (int a = 0; a < kTileFields; ++a)
    for (int b = a + 1; b < kTileFields; ++b)
      if (adjacent_fields(a, b)) moves.push_back({a, b});
  return moves;
}

std::size_t SymbolicObsHash::operator()(const SymbolicObs& obs) const noexcept {
  // FNV-1a
  std::size_t h = 1469598103934665603ull;
  for (auto b : obs.bits) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

SymbolicObs to_symbolic(const Board& board) {
  if (const auto* lights = std::get_if<LightsBoard>(&board)) return SymbolicObs{lights->cells};
  const auto& tiles = std::get<TileBoard>(board);
  SymbolicObs obs{std::vector<std::uint8_t>(81, 0)};
  for (int field = 0; field < kTileFields; ++field) obs.bits[static_cast<std::size_t>(9 * tiles.chips[field] + field)] = 1;
  return obs;
}

std::optional<Board> from_symbolic(const GameSpec& spec, const SymbolicObs& obs) {
  if (static_cast<int>(obs.size()) != spec.symbolic_dim()) return std::nullopt;
  if (spec.kind == GameKind::lights_out) {
    for (auto b : obs.bits)
      if (b > 1) return std::nullopt;
    return LightsBoard{spec.size, obs.bits};
  }
  TileBoard board;
  std::array<int, 9> per_field{};
  for (int chip = 0; chip < 9; ++chip) {
    int found = 0;
    for (int field = 0; field < 9; ++field) {
      const auto bit = obs.bits[static_cast<std::size_t>(9 * chip + field)];
      if (bit > 1) return std::nullopt;
      if (bit) {
        ++found;
        ++per_field[field];
        board.chips[field] = static_cast<std::uint8_t>(chip);
      }
    }
    if (found != 1) return std::nullopt;
  }
  for (int c : per_field)
    if (c != 1) return std::nullopt;
  return board;
}

std::optional<int> solution_depth(const Board& board) {
  const GameSpec spec = spec_of(board);
  if (spec.kind == GameKind::lights_out && spec.size > kMaxLightsSearchSize)
    throw std::invalid_argument("exhaustive depth search supports LightsOut boards up to 5x5");
  const std::uint64_t goal = encode(goal_board(spec));
  const std::uint64_t start = encode(board);
  if (start == goal) return 0;

  const CodeGraph graph(spec);
  // LightsOut uses a dense bitset over all 2^(n*n) boards; TileSwap a hash set.
  std::vector<bool> dense;
  std::unordered_set<std::uint64_t> sparse;
  const bool use_dense = spec.kind == GameKind::lights_out;
  if (use_dense) dense.assign(std::size_t{1} << (spec.size * spec.size), false);
  auto visit = [&](std::uint64_t code) {
    if (use_dense) {
      if (dense[code]) return false;
      dense[code] = true;
      return true;
    }
    return sparse.insert(code).second;
  };

  std::vector<std::uint64_t> frontier{start}, next;
  visit(start);
  for (int depth = 1; !frontier.empty(); ++depth) {
    next.clear();
    for (auto code : frontier) {
      bool found = false;
      graph.for_each_neighbor(code, [&](std::uint64_t nb) {
        if (nb == goal) found = true;
        if (visit(nb)) next.push_back(nb);
      });
      if (found) return depth;
    }
    frontier.swap(next);
  }
  return std::nullopt;
}

std::string_view split_name(SplitLabel split) {
  switch (split) {
    case SplitLabel::train: return "train";
    case SplitLabel::val: return "val";
    case SplitLabel::test: return "test";
  }
  return "?";
}

SplitLabel parse_split(std::string_view name) {
  if (name == "train") return SplitLabel::train;
  if (name == "val") return SplitLabel::val;
  if (name == "test") return SplitLabel::test;
  throw std::invalid_argument("unknown split '" + std::string(name) + "'");
}

std::string serialize_board(const Board& board) {
  std::string out;
  auto append = [&](int v) {
    if (!out.empty()) out.push_back(',');
    out += std::to_string(v);
  };
  if (const auto* lights = std::get_if<LightsBoard>(&board)) {
    for (auto c : lights->cells) append(c);
  } else {
    for (auto c : std::get<TileBoard>(board).chips) append(c);
  }
  return out;
}

Board parse_board(const GameSpec& spec, std::string_view text) {
  std::vector<int> values;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto token = text.substr(0, comma);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size())
      throw std::invalid_argument("malformed board value '" + std::string(token) + "'");
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (static_cast<int>(values.size()) != spec.num_fields())
    throw std::invalid_argument("board has " + std::to_string(values.size()) + " values, expected " +
                                std::to_string(spec.num_fields()));
  if (spec.kind == GameKind::lights_out) {
    LightsBoard board = LightsBoard::all_off(spec.size);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] != 0 && values[i] != 1) throw std::invalid_argument("LightsOut cell must be 0 or 1");
      board.cells[i] = static_cast<std::uint8_t>(values[i]);
    }
    return board;
  }
  TileBoard board;
  std::array<bool, 9> seen{};
  for (std::size_t i = 0; i < 9; ++i) {
    if (values[i] < 0 || values[i] > 8 || seen[static_cast<std::size_t>(values[i])])
      throw std::invalid_argument("TileSwap chips must be a permutation of 0..8");
    seen[static_cast<std::size_t>(values[i])] = true;
    board.chips[i] = static_cast<std::uint8_t>(values[i]);
  }
  return board;
}

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

SplitLabel split_of(const Board& board) {
  switch (crc32_of(serialize_board(board)) % 3u) {
    case 0: return SplitLabel::train;
    case 1: return SplitLabel::val;
    default: return SplitLabel::test;
  }
}

BoardCatalog::BoardCatalog(const GameSpec& spec, int max_depth) : spec_(spec) {
  if (max_depth < 0) throw std::invalid_argument("max_depth must be non-negative");
  if (spec.kind == GameKind::lights_out) check_lights_size(spec.size);
  const CodeGraph graph(spec);
  std::unordered_set<std::uint64_t> visited;
  std::vector<std::uint64_t> frontier{encode(goal_board(spec))};
  visited.insert(frontier.front());
  for (int depth = 0; depth <= max_depth; ++depth) {
    std::vector<Board> layer;
    layer.reserve(frontier.size());
    for (auto code : frontier) layer.push_back(decode(spec, code));
    layers_.push_back(std::move(layer));
    auto sorted = frontier;
    std::sort(sorted.begin(), sorted.end());
    layer_codes_.push_back(std::move(sorted));
    if (depth == max_depth) break;

    std::vector<std::uint64_t> next;
    for (auto code : frontier)
      graph.for_each_neighbor(code, [&](std::uint64_t nb) {
        if (visited.insert(nb).second) next.push_back(nb);
      });
    frontier.swap(next);
  }
}

const std::vector<Board>& BoardCatalog::boards(int depth) const {
  if (depth < 0 || depth > max_depth()) throw std::out_of_range("catalog depth out of range");
  return layers_[static_cast<std::size_t>(depth)];
}

std::size_t BoardCatalog::count(int depth, std::optional<SplitLabel> split) const {
  const auto& layer = boards(depth);
  if (!split) return layer.size();
  return static_cast<std::size_t>(
      std::count_if(layer.begin(), layer.end(), [&](const Board& b) { return split_of(b) == *split; }));
}

std::optional<int> BoardCatalog::depth_of(const Board& board) const {
  if (spec_of(board) != spec_) return std::nullopt;
  const auto code = encode(board);
  for (std::size_t d = 0; d < layer_codes_.size(); ++d)
    if (std::binary_search(layer_codes_[d].begin(), layer_codes_[d].end(), code)) return static_cast<int>(d);
  return std::nullopt;
}

const BoardCatalog& catalog_for(const GameSpec& spec) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<BoardCatalog>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{static_cast<int>(spec.kind), spec.size}];
  if (!slot) slot = std::make_unique<BoardCatalog>(spec);
  return *slot;
}

std::size_t count_boards(const GameSpec& spec, int depth) {
  if (depth < 1 || depth > BoardCatalog::kMaxDepth) throw std::invalid_argument("depth must be in [1, 5]");
  return catalog_for(spec).count(depth);
}

Board generate_board(const GameSpec& spec, int depth, Rng& rng, SplitLabel split, int max_attempts) {
  if (depth < 1 || depth > BoardCatalog::kMaxDepth) throw std::invalid_argument("depth must be in [1, 5]");
  const auto& catalog = catalog_for(spec);
  const auto moves = enumerate_moves(spec);
  const int num_moves = static_cast<int>(moves.size());

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Board board = goal_board(spec);
    if (spec.kind == GameKind::lights_out) {
      if (depth > num_moves) break;
      // S distinct fields: partial Fisher-Yates.
      std::vector<int> order(static_cast<std::size_t>(num_moves));
      std::iota(order.begin(), order.end(), 0);
      for (int i = 0; i < depth; ++i) {
        const int j = uniform_int(rng, i, num_moves - 1);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        board = apply_move(board, moves[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
      }
    } else {
      // Drop sequences where a swap reproduces an earlier board of the sequence.
      std::vector<Board> history{board};
      bool undone = false;
      for (int i = 0; i < depth && !undone; ++i) {
        board = apply_move(board, moves[static_cast<std::size_t>(uniform_int(rng, 0, num_moves - 1))]);
        undone = std::find(history.begin(), history.end(), board) != history.end();
        history.push_back(board);
      }
      if (undone) continue;
    }
    if (catalog.depth_of(board) != depth) continue;
    if (split_of(board) != split) continue;
    return board;
  }
  throw BoardGenerationError("no " + std::string(game_name(spec.kind)) + " board with depth " + std::to_string(depth) +
                             " in split '" + std::string(split_name(split)) + "' after " +
                             std::to_string(max_attempts) + " attempts");
}

std::string format_board_set_line(const BoardSetEntry& entry) {
  return std::string(game_name(entry.game)) + "," + std::to_string(entry.depth) + "," +
         std::string(split_name(entry.split)) + "," + serialize_board(entry.board);
}

BoardSetEntry parse_board_set_line(const GameSpec& spec, std::string_view line) {
  auto next_field = [&](std::string_view& rest) {
    const auto comma = rest.find(',');
    if (comma == std::string_view::npos) throw std::invalid_argument("truncated board-set line");
    auto field = rest.substr(0, comma);
    rest.remove_prefix(comma + 1);
    return field;
  };
  std::string_view rest = line;
  BoardSetEntry entry;
  entry.game = parse_game(next_field(rest));
  if (entry.game != spec.kind) throw std::invalid_argument("board-set line game does not match");
  const auto depth_text = next_field(rest);
  const auto [ptr, ec] = std::from_chars(depth_text.data(), depth_text.data() + depth_text.size(), entry.depth);
  if (ec != std::errc{} || ptr != depth_text.data() + depth_text.size())
    throw std::invalid_argument("malformed depth in board-set line");
  entry.split = parse_split(next_field(rest));
  entry.board = parse_board(spec, rest);
  return entry;
}

std::size_t write_board_set(std::ostream& out, const GameSpec& spec, std::span<const int> depths) {
  const auto& catalog = catalog_for(spec);
  std::size_t lines = 0;
  for (int depth : depths) {
    if (depth < 1 || depth > catalog.max_depth()) throw std::invalid_argument("depth must be in [1, 5]");
    for (const auto& board : catalog.boards(depth)) {
      out << format_board_set_line({spec.kind, depth, split_of(board), board}) << '\n';
      ++lines;
    }
  }
  return lines;
}

}  // namespace seads
