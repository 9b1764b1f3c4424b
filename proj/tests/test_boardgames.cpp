#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "seads/boardgames.hpp"
#include "seads/kernels.hpp"

using namespace seads;

TEST(LightsOut, PushTogglesCrossAndWrapsNothing) {
  const auto b = lights_push(LightsBoard::all_off(5), {0, 0});
  int on = 0;
  for (auto c : b.cells) on += c;
  EXPECT_EQ(on, 3);
  EXPECT_EQ(b.at(0, 0), 1);
  EXPECT_EQ(b.at(0, 1), 1);
  EXPECT_EQ(b.at(1, 0), 1);
  const auto centre = lights_push(LightsBoard::all_off(5), {2, 2});
  on = 0;
  for (auto c : centre.cells) on += c;
  EXPECT_EQ(on, 5);
  EXPECT_EQ(lights_push(centre, {2, 2}), LightsBoard::all_off(5));
}

TEST(LightsOut, RejectsOffBoardMove) {
  EXPECT_THROW(lights_push(LightsBoard::all_off(5), {5, 0}), InvalidMove);
  EXPECT_THROW(lights_push(LightsBoard::all_off(5), {0, -1}), InvalidMove);
}

TEST(TileSwap, SwapsAdjacentFieldsOnly) {
  const auto b = tiles_swap(TileBoard::identity(), {0, 1});
  EXPECT_EQ(b.chips[0], 1);
  EXPECT_EQ(b.chips[1], 0);
  EXPECT_THROW(tiles_swap(TileBoard::identity(), {0, 4}), InvalidMove);
  EXPECT_THROW(tiles_swap(TileBoard::identity(), {2, 3}), InvalidMove);
  EXPECT_EQ(enumerate_moves(GameSpec::tile_swap()).size(), 12u);
  EXPECT_EQ(enumerate_moves(GameSpec::lights_out(5)).size(), 25u);
}

TEST(Symbolic, RoundTripsAndEncodesChipField) {
  Rng rng = make_stream(5, 0);
  for (const auto spec : {GameSpec::lights_out(5), GameSpec::tile_swap()}) {
    for (int d = 1; d <= 5; ++d) {
      const Board b = generate_board(spec, d, rng, SplitLabel::train);
      const auto z = to_symbolic(b);
      EXPECT_EQ(static_cast<int>(z.size()), spec.symbolic_dim());
      EXPECT_EQ(from_symbolic(spec, z), b);
    }
  }
  const auto z = to_symbolic(tiles_swap(TileBoard::identity(), {0, 1}));
  // chip 1 now sits on field 0, chip 0 on field 1
  EXPECT_EQ(z[9 * 1 + 0], 1);
  EXPECT_EQ(z[9 * 0 + 1], 1);
  EXPECT_EQ(z[0], 0);
  SymbolicObs bad = z;
  bad.bits[0] = 1;  // two chips on field 0
  EXPECT_FALSE(from_symbolic(GameSpec::tile_swap(), bad).has_value());
}

TEST(Catalog, LightsOutLayerSizesMatchIndependentSearch) {
  const auto spec = GameSpec::lights_out(5);
  const std::vector<std::size_t> expected{1, 25, 300, 2300, 12650, 53130};
  EXPECT_EQ(oracle::layer_sizes(spec, 5), expected);
  for (int d = 1; d <= 5; ++d) EXPECT_EQ(count_boards(spec, d), expected[static_cast<std::size_t>(d)]);
}

TEST(Catalog, TileSwapLayerSizesMatchIndependentSearch) {
  const auto spec = GameSpec::tile_swap();
  const std::vector<std::size_t> expected{1, 12, 88, 470, 1978, 6658};
  EXPECT_EQ(oracle::layer_sizes(spec, 5), expected);
  for (int d = 1; d <= 5; ++d) EXPECT_EQ(count_boards(spec, d), expected[static_cast<std::size_t>(d)]);
}

TEST(Splits, Crc32MatchesBitwiseReference) {
  EXPECT_EQ(crc32_of("123456789"), 0xCBF43926u);
  for (const std::string s : {"", "0", "1,0,1", "0,1,2,3,4,5,6,7,8"}) EXPECT_EQ(crc32_of(s), oracle::crc32(s));
}

TEST(Splits, LightsOutDepthFiveSplitSizes) {
  const auto& cat = catalog_for(GameSpec::lights_out(5));
  EXPECT_EQ(cat.count(5, SplitLabel::train), 17849u);
  EXPECT_EQ(cat.count(5, SplitLabel::val), 17368u);
  EXPECT_EQ(cat.count(5, SplitLabel::test), 17913u);
}

TEST(Splits, SplitIsCrcOfTextModThree) {
  const auto& cat = catalog_for(GameSpec::tile_swap());
  for (const auto& b : cat.boards(2)) {
    const auto expected = static_cast<SplitLabel>(oracle::crc32(serialize_board(b)) % 3);
    EXPECT_EQ(split_of(b), expected);
  }
}

TEST(Splits, ParallelCountsEqualSerial) {
  const auto& boards = catalog_for(GameSpec::lights_out(5)).boards(4);
  EXPECT_EQ(kernels::split_counts(boards), kernels::split_counts_serial(boards));
}

TEST(SolutionDepth, AgreesWithCatalog) {
  for (const auto spec : {GameSpec::lights_out(4), GameSpec::tile_swap()}) {
    const BoardCatalog cat(spec, 3);
    for (int d = 0; d <= 3; ++d)
      for (std::size_t i = 0; i < cat.boards(d).size(); i += 7) EXPECT_EQ(solution_depth(cat.boards(d)[i]), d);
  }
  EXPECT_EQ(solution_depth(goal_board(GameSpec::lights_out(5))), 0);
}

TEST(SolutionDepth, LightsOutThreeByThreeLayersAreBinomial) {
  // pushes commute and the 3x3 push matrix is invertible over GF(2), so the
  // boards at depth d are exactly the C(9, d) subsets of pushed fields
  const BoardCatalog cat(GameSpec::lights_out(3), 5);
  const std::size_t binom[] = {1, 9, 36, 84, 126, 126};
  for (int d = 0; d <= 5; ++d) EXPECT_EQ(cat.boards(d).size(), binom[d]);
  LightsBoard all_on = LightsBoard::all_off(3);
  all_on.cells.assign(9, 1);
  EXPECT_EQ(solution_depth(all_on), 5);
}

TEST(Generation, HasRequestedDepthAndSplit) {
  Rng rng = make_stream(9, 0);
  for (const auto spec : {GameSpec::lights_out(5), GameSpec::tile_swap()}) {
    for (int d = 1; d <= 5; ++d)
      for (auto split : {SplitLabel::train, SplitLabel::val, SplitLabel::test}) {
        if (catalog_for(spec).count(d, split) == 0) {
          EXPECT_THROW(generate_board(spec, d, rng, split, 200), BoardGenerationError);
          continue;
        }
        const Board b = generate_board(spec, d, rng, split);
        EXPECT_EQ(solution_depth(b), d);
        EXPECT_EQ(split_of(b), split);
      }
  }
}

TEST(Generation, TileSwapDepthOneTestSplitIsEmpty) {
  EXPECT_EQ(catalog_for(GameSpec::tile_swap()).count(1, SplitLabel::test), 0u);
}

TEST(Generation, IsDeterministicForASeed) {
  Rng a = make_stream(4, 1), b = make_stream(4, 1);
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(generate_board(GameSpec::lights_out(5), 4, a, SplitLabel::train),
              generate_board(GameSpec::lights_out(5), 4, b, SplitLabel::train));
}

TEST(BoardSet, LineRoundTripAndLabels) {
  const auto spec = GameSpec::lights_out(5);
  std::ostringstream out;
  const std::vector<int> depths{1};
  EXPECT_EQ(write_board_set(out, spec, depths), 25u);
  std::istringstream in(out.str());
  int lines = 0;
  for (std::string line; std::getline(in, line); ++lines) {
    const auto entry = parse_board_set_line(spec, line);
    EXPECT_EQ(entry.depth, 1);
    EXPECT_EQ(entry.split, split_of(entry.board));
    EXPECT_EQ(format_board_set_line(entry), line);
  }
  EXPECT_EQ(lines, 25);
  std::ostringstream again;
  write_board_set(again, spec, depths);
  EXPECT_EQ(again.str(), out.str());
}

TEST(BoardSet, RejectsMalformedLines) {
  const auto spec = GameSpec::lights_out(5);
  EXPECT_ANY_THROW(parse_board_set_line(spec, "lightsout,1,train"));
  EXPECT_ANY_THROW(parse_board_set_line(spec, "lightsout,1,nosplit,0,0,0"));
  EXPECT_ANY_THROW(parse_board(spec, "0,1,2"));
  EXPECT_ANY_THROW(parse_board(GameSpec::tile_swap(), "0,0,1,2,3,4,5,6,7"));
}
