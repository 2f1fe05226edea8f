#pragma once

// Labeled (feature vector, tile codes) pairs generated through the surrogate,
// plus the "MSDS/1" line-delimited file format.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metainv/codec.hpp"
#include "metainv/features.hpp"
#include "metainv/surrogate.hpp"

namespace metainv {

inline constexpr std::string_view kDatasetFormat = "MSDS/1";

struct Sample {
  UnitCellCodes codes;
  FeatureVector features{};
  std::optional<Spectrum> spectrum;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::vector<Sample> samples;
  std::uint64_t generator_seed = 0;
  std::string surrogate_config_digest;
  bool canonical_labels = true;

  std::size_t size() const noexcept { return samples.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Features of a structure: target_to_vector(extract_notches(simulate(codes))).
FeatureVector features_of(const UnitCellCodes& codes, const SurrogateConfig& cfg);

/// n samples with 16 independent uniform codes each. Sample i draws from
/// Rng::substream(seed, i). In canonical mode the label is stored sorted.
/// Throws InvalidInput when n == 0.
Dataset generate(std::size_t n, std::uint64_t seed, const SurrogateConfig& cfg = {}, bool canonical = true,
                 bool store_spectra = false);

/// Seeded shuffle then prefix split: floor(n * fraction) training samples.
/// Throws InvalidInput when the fraction is outside (0, 1) or a side is empty.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction = 0.7, std::uint64_t seed = 42);

/// Content digest of the serialized dataset.
std::string dataset_digest(const Dataset& data);

void save_dataset(const Dataset& data, std::ostream& out);
void save_dataset(const Dataset& data, const std::filesystem::path& path);

/// Throws FormatVersionError, MalformedRecordError (with 1-based line) or
/// ConfigMismatchError when the stored digest differs from cfg.digest().
Dataset load_dataset(std::istream& in, const SurrogateConfig& cfg = {});
Dataset load_dataset(const std::filesystem::path& path, const SurrogateConfig& cfg = {});

}  // namespace metainv
