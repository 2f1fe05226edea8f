#pragma once

// Closed-form stand-in for full-wave simulation: the reflection magnitude of
// a unit cell is a sum of Lorentzian notches in dB, one per tile code, whose
// depth saturates with the number of tiles carrying that code.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "metainv/codec.hpp"

namespace metainv {

/// Fixed sampling grid, 4..45 GHz in 0.05 GHz steps.
struct FrequencyGrid {
  static constexpr double start_ghz = 4.0;
  static constexpr double stop_ghz = 45.0;
  static constexpr double step_ghz = 0.05;
  static constexpr std::size_t size = 821;

  static constexpr double frequency(std::size_t index) { return start_ghz + step_ghz * static_cast<double>(index); }
};

class Spectrum {
 public:
  Spectrum() : values_(FrequencyGrid::size, 0.0) {}
  /// Throws InvalidInput unless there are 821 finite values, all <= 0 dB.
  explicit Spectrum(std::vector<double> values_db);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double frequency(std::size_t i) const { return FrequencyGrid::frequency(i); }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::vector<double> values_;
};

struct SurrogateConfig {
  std::array<double, kTileCodeCount> centers_ghz = {6.0, 11.0, 16.0, 21.0, 26.0, 31.0, 36.0, 41.0};
  double halfwidth_ghz = 0.4;
  double max_depth_db = 40.0;

  /// Throws InvalidInput when centers are not strictly increasing inside
  /// (4, 45) GHz or a width/depth is not positive.
  void validate() const;
  /// Stable text form the digest is computed over.
  std::string canonical_text() const;
  /// "fnv1a64:<16 hex digits>" of canonical_text().
  std::string digest() const;

  friend bool operator==(const SurrogateConfig&, const SurrogateConfig&) = default;
};

using TileCounts = std::array<int, kTileCodeCount>;

TileCounts tile_counts(const UnitCellCodes& cell);

/// Notch depth in dB produced by `count` tiles of one code: -D (1 - exp(-n/2)).
double notch_depth_db(int count, const SurrogateConfig& cfg);

/// Reflection in dB at an arbitrary frequency.
double reflection_db(const TileCounts& counts, double freq_ghz, const SurrogateConfig& cfg);

Spectrum simulate(const UnitCellCodes& cell, const SurrogateConfig& cfg = {});
Spectrum simulate_counts(const TileCounts& counts, const SurrogateConfig& cfg = {});

/// Closed-form notch of one tile code, used to check the numeric extractor.
struct AnalyticNotch {
  double freq_ghz = 0.0;
  double depth_db = 0.0;
  /// -10 dB width; empty when the notch does not reach -10 dB.
  std::optional<double> bandwidth_ghz;
  /// Largest contribution of the other codes at this code's center, in dB.
  double neighbor_db = 0.0;
  bool isolated = false;
};

/// Throws InvalidInput when code k is absent from the cell.
AnalyticNotch analytic_notch(const UnitCellCodes& cell, int code, const SurrogateConfig& cfg = {});

/// "frequency_ghz,reflection_db" header, then one row per grid point.
void write_spectrum_csv(const Spectrum& spectrum, std::ostream& out);

/// Standalone SVG line plot of the spectrum with axis ticks.
void write_spectrum_svg(const Spectrum& spectrum, std::ostream& out, const std::string& title = {});

}  // namespace metainv
