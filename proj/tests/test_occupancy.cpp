#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "ncsense/occupancy.hpp"

using namespace ncsense;

namespace {

SimulationConfig small(int n_sub, int n_occ, int m_sym) {
  auto cfg = default_config();
  cfg.n_subcarriers = n_sub;
  cfg.n_occupied = n_occ;
  cfg.n_symbols = m_sym;
  return cfg;
}

std::vector<int> column_bits(const OccupancyMask& mask, int m) {
  std::vector<int> out;
  for (int i = 0; i < mask.subcarriers(); ++i) out.push_back(mask.at(i, m));
  return out;
}

}  // namespace

TEST(Scenario1, EdgeBandPattern) {
  const auto mask = scenario1_mask(small(8, 4, 3));
  for (int m = 0; m < 3; ++m) {
    EXPECT_EQ(column_bits(mask, m), (std::vector<int>{1, 1, 0, 0, 0, 0, 1, 1}));
  }
}

TEST(Scenario1, FullOccupancyIsAllOnes) {
  const auto mask = scenario1_mask(small(8, 8, 2));
  EXPECT_EQ(mask.total(), 16);
}

TEST(Scenario1, DefaultColumnsHold256Ones) {
  const auto mask = scenario1_mask(default_config());
  for (int m = 0; m < mask.symbols(); ++m) EXPECT_EQ(mask.column_count(m), 256);
}

TEST(Scenario1, OddOccupiedIsParityError) {
  EXPECT_THROW(scenario1_mask(small(8, 3, 2)), ParityError);
}

TEST(Scenario2, SwitchedHalves) {
  const auto mask = scenario2_mask(small(8, 4, 4));
  const std::vector<int> edge{1, 1, 0, 0, 0, 0, 1, 1};
  const std::vector<int> centre{0, 0, 1, 1, 1, 1, 0, 0};
  EXPECT_EQ(column_bits(mask, 0), edge);
  EXPECT_EQ(column_bits(mask, 1), edge);
  EXPECT_EQ(column_bits(mask, 2), centre);
  EXPECT_EQ(column_bits(mask, 3), centre);
}

TEST(Scenario2, ColumnCounts) {
  const auto mask = scenario2_mask(small(16, 4, 6));
  for (int m = 0; m < 3; ++m) EXPECT_EQ(mask.column_count(m), 4);
  for (int m = 3; m < 6; ++m) EXPECT_EQ(mask.column_count(m), 12);
  const auto def = scenario2_mask(default_config());
  for (int m = 0; m < def.symbols(); ++m) EXPECT_EQ(def.column_count(m), 256);
}

TEST(Scenario2, TwoSymbolsOneOfEach) {
  const auto mask = scenario2_mask(small(8, 4, 2));
  EXPECT_EQ(column_bits(mask, 0), (std::vector<int>{1, 1, 0, 0, 0, 0, 1, 1}));
  EXPECT_EQ(column_bits(mask, 1), (std::vector<int>{0, 0, 1, 1, 1, 1, 0, 0}));
}

TEST(Scenario2, OddDimensionsAreParityErrors) {
  EXPECT_THROW(scenario2_mask(small(8, 4, 3)), ParityError);
  EXPECT_THROW(scenario2_mask(small(8, 5, 4)), ParityError);
}

TEST(Scenario2, HalvesAreComplementary) {
  const auto mask = scenario2_mask(default_config());
  for (int i = 0; i < mask.subcarriers(); ++i) EXPECT_NE(mask.at(i, 0), mask.at(i, 13));
}

TEST(Selection, ColumnOfEdgeBand) {
  const auto mask = scenario1_mask(small(8, 4, 2));
  const auto sel = column_selection(mask, 0);
  EXPECT_EQ(sel.indices, (std::vector<int>{0, 1, 6, 7}));
  EXPECT_EQ(sel.parent_len, 8);
  EXPECT_TRUE(is_valid_selection(sel));
}

TEST(Selection, FullAndEmptyColumns) {
  OccupancyMask mask(5, 2);
  for (int i = 0; i < 5; ++i) mask.set(i, 1, true);
  EXPECT_TRUE(column_selection(mask, 0).empty());
  EXPECT_EQ(column_selection(mask, 1).indices, (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(Selection, RowsOfSwitchedMask) {
  const auto mask = scenario2_mask(small(8, 4, 4));
  EXPECT_EQ(row_selection(mask, 0).indices, (std::vector<int>{0, 1}));
  EXPECT_EQ(row_selection(mask, 3).indices, (std::vector<int>{2, 3}));
  EXPECT_EQ(row_selection(mask, 0).parent_len, 4);
}

TEST(Selection, RowsOfStaticMask) {
  const auto mask = scenario1_mask(small(8, 4, 5));
  EXPECT_EQ(row_selection(mask, 7).indices, (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_TRUE(row_selection(mask, 3).empty());
}

TEST(Selection, OutOfRangeIndices) {
  const auto mask = scenario1_mask(small(8, 4, 2));
  EXPECT_THROW(column_selection(mask, 2), std::out_of_range);
  EXPECT_THROW(row_selection(mask, -1), std::out_of_range);
}

TEST(Selection, ValidityRules) {
  EXPECT_FALSE(is_valid_selection({{1, 1}, 4}));
  EXPECT_FALSE(is_valid_selection({{2, 1}, 4}));
  EXPECT_FALSE(is_valid_selection({{4}, 4}));
  EXPECT_TRUE(is_valid_selection({{}, 4}));
}

// Union over columns of selections equals the set of ones in the mask.
TEST(MaskProperty, SelectionsCoverExactlyTheOnes) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    OccupancyMask mask(1 + rng() % 20, 1 + rng() % 10);
    for (int i = 0; i < mask.subcarriers(); ++i) {
      for (int m = 0; m < mask.symbols(); ++m) mask.set(i, m, rng() % 2);
    }
    int from_cols = 0, from_rows = 0;
    for (int m = 0; m < mask.symbols(); ++m) {
      const auto sel = column_selection(mask, m);
      EXPECT_TRUE(is_valid_selection(sel));
      for (int i : sel.indices) EXPECT_TRUE(mask.at(i, m));
      from_cols += static_cast<int>(sel.size());
    }
    for (int i = 0; i < mask.subcarriers(); ++i) {
      from_rows += static_cast<int>(row_selection(mask, i).size());
    }
    EXPECT_EQ(from_cols, mask.total());
    EXPECT_EQ(from_rows, mask.total());
  }
}

TEST(MaskCsv, RoundTrip) {
  const auto mask = scenario2_mask(small(8, 4, 4));
  std::stringstream buf;
  write_mask_csv(buf, mask);
  EXPECT_EQ(read_mask_csv(buf), mask);
}

TEST(MaskCsv, RejectsBadInput) {
  std::istringstream bad("1,0\n1,2\n");
  EXPECT_THROW(read_mask_csv(bad), ConfigError);
  std::istringstream ragged("1,0\n1\n");
  EXPECT_THROW(read_mask_csv(ragged), ConfigError);
  std::istringstream empty("");
  EXPECT_THROW(read_mask_csv(empty), ConfigError);
}
