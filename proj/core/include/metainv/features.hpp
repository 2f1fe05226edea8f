#pragma once

// Notch extraction from spectra and the 24-element normalized network input.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metainv/surrogate.hpp"

namespace metainv {

inline constexpr std::size_t kMaxNotches = 8;
inline constexpr std::size_t kFeatureWidth = 3 * kMaxNotches;  // 24
inline constexpr double kNotchThresholdDb = -10.0;

// Normalization ranges of the feature vector.
inline constexpr double kDepthCapDb = 50.0;
inline constexpr double kBandwidthCapGhz = 5.0;

struct Notch {
  double freq_ghz = 0.0;
  double depth_db = 0.0;
  double bandwidth_ghz = 0.0;

  friend bool operator==(const Notch&, const Notch&) = default;
};

/// Up to eight notches, strictly increasing in frequency.
struct DesignTarget {
  std::vector<Notch> notches;

  /// Throws InvalidInput when the count, ordering, or a field is out of range.
  void validate() const;
  std::size_t size() const noexcept { return notches.size(); }

  friend bool operator==(const DesignTarget&, const DesignTarget&) = default;
};

using FeatureVector = std::array<double, kFeatureWidth>;

/// Runs of samples strictly below threshold_db become notches: frequency and
/// depth at the run minimum (first index on ties), bandwidth between the
/// linearly interpolated threshold crossings. Keeps the 8 deepest runs.
DesignTarget extract_notches(const Spectrum& spectrum, double threshold_db = kNotchThresholdDb);

/// Slot i carries ((f - 4)/41, min(-depth, 50)/50, min(bw, 5)/5); unused
/// slots are zero. Throws InvalidInput for an invalid target or a frequency
/// outside 4..45 GHz.
FeatureVector target_to_vector(const DesignTarget& target);

/// Slots whose depth component exceeds 0.2 (deeper than -10 dB) are notches.
/// Throws InvalidInput unless values has 24 entries.
DesignTarget vector_to_target(std::span<const double> values);

/// Parses "freq,depth,bw;freq,depth,bw;..." (GHz, dB, GHz). Notches are sorted
/// by frequency. Throws InvalidInput on malformed text or an invalid target.
/// An empty or all-blank string is the empty target.
DesignTarget parse_target(std::string_view text);
std::string format_target(const DesignTarget& target);

}  // namespace metainv
