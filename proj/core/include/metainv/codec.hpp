#pragma once

// Unit-cell geometry: eight concentric-ring 8x8 tiles, the 3-bit tile code,
// 4x4 tilings assembled into 32x32 copper masks, and projection of network
// pixel output back onto legal tilings.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

namespace metainv {

inline constexpr int kTileCodeCount = 8;
inline constexpr int kTileSize = 8;                                // pixels per tile side
inline constexpr int kTilesPerSide = 4;
inline constexpr int kTileCount = kTilesPerSide * kTilesPerSide;  // 16
inline constexpr int kCellSize = kTileSize * kTilesPerSide;       // 32
inline constexpr int kPixelCount = kCellSize * kCellSize;         // 1024
inline constexpr int kBitsPerCode = 3;
inline constexpr int kCodeBitCount = kTileCount * kBitsPerCode;  // 48

using TileBitmap = std::array<std::array<std::uint8_t, kTileSize>, kTileSize>;

/// 16 tile codes (0..7), row-major over the 4x4 tile grid.
class UnitCellCodes {
 public:
  UnitCellCodes() { codes_.fill(0); }
  /// Throws InvalidInput if any code is outside 0..7.
  explicit UnitCellCodes(const std::array<int, kTileCount>& codes);
  /// Throws InvalidInput unless exactly 16 codes in 0..7 are given.
  static UnitCellCodes from_span(std::span<const int> codes);
  static UnitCellCodes uniform(int code);

  int operator[](std::size_t tile) const { return codes_.at(tile); }
  int at(int row, int col) const { return codes_.at(static_cast<std::size_t>(row * kTilesPerSide + col)); }
  const std::array<std::uint8_t, kTileCount>& codes() const noexcept { return codes_; }

  /// Same multiset of codes, sorted ascending in row-major order.
  UnitCellCodes sorted() const;

  friend bool operator==(const UnitCellCodes&, const UnitCellCodes&) = default;
  friend auto operator<=>(const UnitCellCodes&, const UnitCellCodes&) = default;

 private:
  std::array<std::uint8_t, kTileCount> codes_;
};

/// 32x32 binary copper layout (1 = copper).
class PixelMask {
 public:
  PixelMask() { bits_.fill(0); }

  std::uint8_t at(int row, int col) const { return bits_.at(static_cast<std::size_t>(row * kCellSize + col)); }
  void set(int row, int col, bool value);
  int ones() const;
  const std::array<std::uint8_t, kPixelCount>& bits() const noexcept { return bits_; }

  friend bool operator==(const PixelMask&, const PixelMask&) = default;

 private:
  std::array<std::uint8_t, kPixelCount> bits_;
};

/// Physical dimensions of the fabricated cell; exported as metadata only.
struct GeometryMetadata {
  double lattice_length_mm = 0.2;
  double period_mm = 6.4;
  double copper_thickness_mm = 0.018;
  double substrate_height_mm = 1.5;
  double substrate_permittivity_real = 4.2;
  double substrate_permittivity_imag = 0.025;
};

inline constexpr GeometryMetadata kGeometry{};

/// Ring index of pixel (i, j) in an 8x8 tile: distance to the nearest edge.
constexpr int border_band(int i, int j) {
  const int a = i < j ? i : j;
  const int b = (kTileSize - 1 - i) < (kTileSize - 1 - j) ? (kTileSize - 1 - i) : (kTileSize - 1 - j);
  return a < b ? a : b;
}

/// Canonical ring tile for `code`. Throws InvalidInput outside 0..7.
const TileBitmap& pattern_bitmap(int code);
int ones(const TileBitmap& bitmap);

/// 3 bits per tile, MSB first, tiles in row-major order.
std::array<double, kCodeBitCount> encode_codes(const UnitCellCodes& cell);
/// Thresholds each value at 0.5 (ties -> 1) and reads 3-bit groups MSB first.
/// Throws InvalidInput unless bits has 48 entries.
UnitCellCodes decode_bits(std::span<const double> bits);

PixelMask assemble_unit_cell(const UnitCellCodes& cell);

std::array<double, kPixelCount> flatten_mask(const PixelMask& mask);
/// Inverse of flatten_mask; values are thresholded at 0.5. Throws
/// InvalidInput on a length other than 1024.
PixelMask unflatten_mask(std::span<const double> values);

/// Thresholds pixels at 0.5, then picks for each 8x8 block the tile code at
/// minimum Hamming distance (lowest code on ties).
UnitCellCodes project_pixels_to_tiles(std::span<const double> raw);

/// Plain PBM (P1), 32x32, with geometry metadata as comment lines.
void write_pbm(const PixelMask& mask, std::ostream& out);
/// 32 rows of 32 comma-separated 0/1 values, preceded by '#' metadata lines.
void write_mask_csv(const PixelMask& mask, std::ostream& out);

/// "c0 c1 ... c15" (0-based codes).
std::string format_codes(const UnitCellCodes& cell);
/// Parses 16 integers separated by spaces and/or commas. Throws InvalidInput.
UnitCellCodes parse_codes(const std::string& text);

}  // namespace metainv
