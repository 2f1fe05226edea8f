#include <algorithm>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "metainv/codec.hpp"
#include "metainv/error.hpp"
#include "metainv/rng.hpp"

namespace metainv {
namespace {

UnitCellCodes random_cell(Rng& rng) {
  std::array<int, kTileCount> c{};
  for (auto& v : c) v = static_cast<int>(rng.below(kTileCodeCount));
  return UnitCellCodes(c);
}

// Count of cells in one band, straight from the band definition.
int band_cells(int band) {
  int n = 0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) n += std::min({i, j, 7 - i, 7 - j}) == band ? 1 : 0;
  return n;
}

TEST(Bitmaps, OnesCountsFollowBands) {
  EXPECT_EQ(band_cells(0), 28);
  EXPECT_EQ(band_cells(3), 4);
  EXPECT_EQ(ones(pattern_bitmap(0)), 28);
  EXPECT_EQ(ones(pattern_bitmap(6)), 4);
  const std::array<int, 8> expected = {band_cells(0),
                                       band_cells(0) + band_cells(1),
                                       band_cells(1),
                                       band_cells(1) + band_cells(2),
                                       band_cells(2),
                                       band_cells(2) + band_cells(3),
                                       band_cells(3),
                                       band_cells(0) + band_cells(2)};
  for (int code = 0; code < 8; ++code) {
    EXPECT_EQ(ones(pattern_bitmap(code)), expected[static_cast<std::size_t>(code)]) << code;
    EXPECT_GE(ones(pattern_bitmap(code)), 4);
    EXPECT_LE(ones(pattern_bitmap(code)), 64);
  }
}

TEST(Bitmaps, DistinctAndFourFoldSymmetric) {
  for (int a = 0; a < 8; ++a) {
    const auto& t = pattern_bitmap(a);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) ASSERT_EQ(t[i][j], t[j][7 - i]) << "code " << a;  // 90 degree rotation
    for (int b = 0; b < 8; ++b) {
      if (a != b) EXPECT_NE(pattern_bitmap(a), pattern_bitmap(b));
    }
  }
}

TEST(Bitmaps, RejectsOutOfRange) {
  EXPECT_THROW(pattern_bitmap(8), InvalidInput);
  EXPECT_THROW(pattern_bitmap(-1), InvalidInput);
}

TEST(UnitCell, ValidatesCodes) {
  std::array<int, kTileCount> c{};
  c[3] = 8;
  EXPECT_THROW(UnitCellCodes{c}, InvalidInput);
  EXPECT_THROW(UnitCellCodes::from_span(std::vector<int>(15, 0)), InvalidInput);
}

TEST(Encode, Examples) {
  const auto zeros = encode_codes(UnitCellCodes{});
  EXPECT_TRUE(std::all_of(zeros.begin(), zeros.end(), [](double b) { return b == 0.0; }));

  std::array<int, kTileCount> c{};
  c[0] = 5;
  const auto bits = encode_codes(UnitCellCodes(c));
  EXPECT_EQ(bits[0], 1.0);
  EXPECT_EQ(bits[1], 0.0);
  EXPECT_EQ(bits[2], 1.0);
  for (std::size_t i = 3; i < bits.size(); ++i) EXPECT_EQ(bits[i], 0.0);
}

TEST(Encode, TwoTilePrefixesExhaustive) {
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      std::array<int, kTileCount> c{};
      c[0] = a;
      c[1] = b;
      const UnitCellCodes cell(c);
      EXPECT_EQ(decode_bits(encode_codes(cell)), cell);
    }
  }
}

TEST(Decode, Thresholding) {
  EXPECT_EQ(decode_bits(std::vector<double>(48, 0.49)), UnitCellCodes{});
  EXPECT_EQ(decode_bits(std::vector<double>(48, 0.5)), UnitCellCodes::uniform(7));
  std::vector<double> bits(48, 0.1);
  bits[0] = 0.6;
  bits[1] = 0.4;
  bits[2] = 0.7;
  EXPECT_EQ(decode_bits(bits)[0], 5);
  EXPECT_THROW(decode_bits(std::vector<double>(47, 0.0)), InvalidInput);
}

TEST(Decode, EveryBitStringIsLegal) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> bits(48);
    for (auto& b : bits) b = static_cast<double>(rng.below(2));
    const UnitCellCodes cell = decode_bits(bits);
    const auto again = encode_codes(cell);
    EXPECT_TRUE(std::equal(bits.begin(), bits.end(), again.begin()));
  }
}

TEST(Assemble, UniformCentralTiles) {
  EXPECT_EQ(assemble_unit_cell(UnitCellCodes::uniform(6)).ones(), 64);
}

TEST(Assemble, BlockPlacementAndOnes) {
  std::array<int, kTileCount> c{};
  c.fill(2);
  c[0] = 7;
  const PixelMask mask = assemble_unit_cell(UnitCellCodes(c));
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) EXPECT_EQ(mask.at(i, j), pattern_bitmap(7)[i][j]);

  Rng rng(6);
  for (int k = 0; k < 100; ++k) {
    const auto cell = random_cell(rng);
    int expected = 0;
    for (auto code : cell.codes()) expected += ones(pattern_bitmap(code));
    EXPECT_EQ(assemble_unit_cell(cell).ones(), expected);
  }
}

TEST(Assemble, InjectiveOverBitmapPairs) {
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      if (a == b) continue;
      std::array<int, kTileCount> x{}, y{};
      x[5] = a;
      y[5] = b;
      EXPECT_NE(assemble_unit_cell(UnitCellCodes(x)), assemble_unit_cell(UnitCellCodes(y)));
    }
  }
}

TEST(Flatten, RowMajor) {
  PixelMask zero;
  const auto z = flatten_mask(zero);
  EXPECT_TRUE(std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; }));

  PixelMask m;
  m.set(2, 5, true);
  const auto v = flatten_mask(m);
  EXPECT_EQ(v[69], 1.0);
  EXPECT_EQ(std::count(v.begin(), v.end(), 1.0), 1);
  EXPECT_THROW(unflatten_mask(std::vector<double>(1023, 0.0)), InvalidInput);
}

TEST(Flatten, RandomRoundTrip) {
  Rng rng(8);
  for (int k = 0; k < 100; ++k) {
    PixelMask m;
    for (int r = 0; r < 32; ++r)
      for (int c = 0; c < 32; ++c) m.set(r, c, rng.below(2) == 1);
    const auto v = flatten_mask(m);
    EXPECT_EQ(unflatten_mask(v), m);
  }
}

TEST(Project, ExactStructuresAreFixedPoints) {
  for (int code = 0; code < 8; ++code) {
    const auto cell = UnitCellCodes::uniform(code);
    EXPECT_EQ(project_pixels_to_tiles(flatten_mask(assemble_unit_cell(cell))), cell);
  }
  Rng rng(10);
  for (int k = 0; k < 200; ++k) {
    const auto cell = random_cell(rng);
    EXPECT_EQ(project_pixels_to_tiles(flatten_mask(assemble_unit_cell(cell))), cell);
  }
}

TEST(Project, EmptyBlockPicksSmallestRing) {
  // Hamming distance to an empty block is the ones count; code 6 has the fewest.
  int best = 0;
  for (int code = 1; code < 8; ++code)
    if (ones(pattern_bitmap(code)) < ones(pattern_bitmap(best))) best = code;
  EXPECT_EQ(best, 6);
  EXPECT_EQ(project_pixels_to_tiles(std::vector<double>(1024, 0.0)), UnitCellCodes::uniform(6));
}

TEST(Project, Idempotent) {
  Rng rng(12);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> raw(1024);
    for (auto& v : raw) v = rng.uniform();
    const auto first = project_pixels_to_tiles(raw);
    EXPECT_EQ(project_pixels_to_tiles(flatten_mask(assemble_unit_cell(first))), first);
  }
}

TEST(Project, TiesPreferLowestCode) {
  // Band 2 plus half of the central 2x2: distance 2 from code 4 (band 2) and
  // from code 5 (bands 2-3).
  std::vector<double> raw(1024, 0.0);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      if (border_band(i, j) == 2) raw[static_cast<std::size_t>(i * 32 + j)] = 1.0;
  raw[3 * 32 + 3] = 1.0;
  raw[3 * 32 + 4] = 1.0;
  EXPECT_EQ(project_pixels_to_tiles(raw)[0], 4);
}

TEST(Export, PbmAndCsv) {
  const auto mask = assemble_unit_cell(UnitCellCodes::uniform(0));
  std::ostringstream pbm;
  write_pbm(mask, pbm);
  const std::string s = pbm.str();
  EXPECT_EQ(s.rfind("P1\n", 0), 0u);
  EXPECT_NE(s.find("# period_mm=6.4"), std::string::npos);
  EXPECT_NE(s.find("\n32 32\n"), std::string::npos);

  std::ostringstream csv;
  write_mask_csv(mask, csv);
  std::istringstream lines(csv.str());
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 31);
  }
  EXPECT_EQ(rows, 32);
}

TEST(Codes, ParseAndFormat) {
  const auto cell = parse_codes("0,1 2 3 4 5 6 7 7 6 5 4 3 2 1 0");
  EXPECT_EQ(cell[2], 2);
  EXPECT_EQ(parse_codes(format_codes(cell)), cell);
  EXPECT_THROW(parse_codes("1 2 3"), InvalidInput);
  EXPECT_THROW(parse_codes("0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 x"), InvalidInput);
  EXPECT_THROW(parse_codes("0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 9"), InvalidInput);
}

}  // namespace
}  // namespace metainv
