#include "metainv/codec.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "metainv/error.hpp"

namespace metainv {

namespace {

// Bands present in each code's ring: code -> bitmask over bands 0..3.
constexpr std::array<unsigned, kTileCodeCount> kBandSets = {
    0b0001,  // 0: outermost ring
    0b0011,  // 1: bands 0-1
    0b0010,  // 2
    0b0110,  // 3: bands 1-2
    0b0100,  // 4
    0b1100,  // 5: bands 2-3
    0b1000,  // 6: central 2x2
    0b0101,  // 7: bands 0 and 2
};

constexpr std::array<TileBitmap, kTileCodeCount> make_bitmaps() {
  std::array<TileBitmap, kTileCodeCount> out{};
  for (int code = 0; code < kTileCodeCount; ++code) {
    for (int i = 0; i < kTileSize; ++i) {
      for (int j = 0; j < kTileSize; ++j) {
        out[code][i][j] = (kBandSets[code] >> border_band(i, j)) & 1u ? 1 : 0;
      }
    }
  }
  return out;
}

constexpr std::array<TileBitmap, kTileCodeCount> kBitmaps = make_bitmaps();

void check_code(int code) {
  if (code < 0 || code >= kTileCodeCount) {
    throw InvalidInput(fmt::format("tile code must lie in 0..7, got {}", code));
  }
}

void write_metadata(std::ostream& out, char comment) {
  const auto& g = kGeometry;
  out << comment << " lattice_length_mm=" << g.lattice_length_mm << '\n';
  out << comment << " period_mm=" << g.period_mm << '\n';
  out << comment << " copper_thickness_mm=" << g.copper_thickness_mm << '\n';
  out << comment << " substrate_height_mm=" << g.substrate_height_mm << '\n';
  out << comment << " substrate_permittivity=" << g.substrate_permittivity_real << '+'
      << g.substrate_permittivity_imag << "i\n";
}

}  // namespace

UnitCellCodes::UnitCellCodes(const std::array<int, kTileCount>& codes) {
  for (std::size_t i = 0; i < codes.size(); ++i) {
    check_code(codes[i]);
    codes_[i] = static_cast<std::uint8_t>(codes[i]);
  }
}

UnitCellCodes UnitCellCodes::from_span(std::span<const int> codes) {
  if (codes.size() != kTileCount) {
    throw InvalidInput(fmt::format("a unit cell has {} tiles, got {} codes", kTileCount, codes.size()));
  }
  std::array<int, kTileCount> a{};
  std::copy(codes.begin(), codes.end(), a.begin());
  return UnitCellCodes(a);
}

UnitCellCodes UnitCellCodes::uniform(int code) {
  std::array<int, kTileCount> a{};
  a.fill(code);
  return UnitCellCodes(a);
}

UnitCellCodes UnitCellCodes::sorted() const {
  UnitCellCodes out = *this;
  std::sort(out.codes_.begin(), out.codes_.end());
  return out;
}

void PixelMask::set(int row, int col, bool value) {
  bits_.at(static_cast<std::size_t>(row * kCellSize + col)) = value ? 1 : 0;
}

int PixelMask::ones() const { return static_cast<int>(std::count(bits_.begin(), bits_.end(), 1)); }

const TileBitmap& pattern_bitmap(int code) {
  check_code(code);
  return kBitmaps[static_cast<std::size_t>(code)];
}

int ones(const TileBitmap& bitmap) {
  int n = 0;
  for (const auto& row : bitmap) n += static_cast<int>(std::count(row.begin(), row.end(), 1));
  return n;
}

std::array<double, kCodeBitCount> encode_codes(const UnitCellCodes& cell) {
  std::array<double, kCodeBitCount> bits{};
  for (int t = 0; t < kTileCount; ++t) {
    const int code = cell[static_cast<std::size_t>(t)];
    for (int b = 0; b < kBitsPerCode; ++b) {
      bits[static_cast<std::size_t>(t * kBitsPerCode + b)] = (code >> (kBitsPerCode - 1 - b)) & 1;
    }
  }
  return bits;
}

UnitCellCodes decode_bits(std::span<const double> bits) {
  if (bits.size() != kCodeBitCount) {
    throw InvalidInput(fmt::format("expected {} code bits, got {}", kCodeBitCount, bits.size()));
  }
  std::array<int, kTileCount> codes{};
  for (int t = 0; t < kTileCount; ++t) {
    int code = 0;
    for (int b = 0; b < kBitsPerCode; ++b) {
      code = (code << 1) | (bits[static_cast<std::size_t>(t * kBitsPerCode + b)] >= 0.5 ? 1 : 0);
    }
    codes[static_cast<std::size_t>(t)] = code;
  }
  return UnitCellCodes(codes);
}

PixelMask assemble_unit_cell(const UnitCellCodes& cell) {
  PixelMask mask;
  for (int tr = 0; tr < kTilesPerSide; ++tr) {
    for (int tc = 0; tc < kTilesPerSide; ++tc) {
      const auto& tile = kBitmaps[static_cast<std::size_t>(cell.at(tr, tc))];
      for (int i = 0; i < kTileSize; ++i) {
        for (int j = 0; j < kTileSize; ++j) {
          mask.set(tr * kTileSize + i, tc * kTileSize + j, tile[i][j] != 0);
        }
      }
    }
  }
  return mask;
}

std::array<double, kPixelCount> flatten_mask(const PixelMask& mask) {
  std::array<double, kPixelCount> out{};
  std::copy(mask.bits().begin(), mask.bits().end(), out.begin());
  return out;
}

PixelMask unflatten_mask(std::span<const double> values) {
  if (values.size() != kPixelCount) {
    throw InvalidInput(fmt::format("expected {} pixels, got {}", kPixelCount, values.size()));
  }
  PixelMask mask;
  for (int r = 0; r < kCellSize; ++r) {
    for (int c = 0; c < kCellSize; ++c) {
      mask.set(r, c, values[static_cast<std::size_t>(r * kCellSize + c)] >= 0.5);
    }
  }
  return mask;
}

UnitCellCodes project_pixels_to_tiles(std::span<const double> raw) {
  const PixelMask mask = unflatten_mask(raw);
  std::array<int, kTileCount> codes{};
  for (int tr = 0; tr < kTilesPerSide; ++tr) {
    for (int tc = 0; tc < kTilesPerSide; ++tc) {
      int best_code = 0;
      int best_distance = kTileSize * kTileSize + 1;
      for (int code = 0; code < kTileCodeCount; ++code) {
        int distance = 0;
        for (int i = 0; i < kTileSize; ++i) {
          for (int j = 0; j < kTileSize; ++j) {
            distance += mask.at(tr * kTileSize + i, tc * kTileSize + j) != kBitmaps[code][i][j] ? 1 : 0;
          }
        }
        if (distance < best_distance) {
          best_distance = distance;
          best_code = code;
        }
      }
      codes[static_cast<std::size_t>(tr * kTilesPerSide + tc)] = best_code;
    }
  }
  return UnitCellCodes(codes);
}

void write_pbm(const PixelMask& mask, std::ostream& out) {
  out << "P1\n";
  write_metadata(out, '#');
  out << kCellSize << ' ' << kCellSize << '\n';
  for (int r = 0; r < kCellSize; ++r) {
    for (int c = 0; c < kCellSize; ++c) {
      if (c != 0) out << ' ';
      out << static_cast<int>(mask.at(r, c));
    }
    out << '\n';
  }
}

void write_mask_csv(const PixelMask& mask, std::ostream& out) {
  write_metadata(out, '#');
  for (int r = 0; r < kCellSize; ++r) {
    for (int c = 0; c < kCellSize; ++c) {
      if (c != 0) out << ',';
      out << static_cast<int>(mask.at(r, c));
    }
    out << '\n';
  }
}

std::string format_codes(const UnitCellCodes& cell) {
  std::string s;
  for (int t = 0; t < kTileCount; ++t) {
    if (t != 0) s += ' ';
    s += std::to_string(cell[static_cast<std::size_t>(t)]);
  }
  return s;
}

UnitCellCodes parse_codes(const std::string& text) {
  std::string cleaned = text;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream ss(cleaned);
  std::vector<int> codes;
  std::string token;
  while (ss >> token) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw InvalidInput(fmt::format("'{}' is not a tile code", token));
    codes.push_back(v);
  }
  return UnitCellCodes::from_span(codes);
}

}  // namespace metainv
