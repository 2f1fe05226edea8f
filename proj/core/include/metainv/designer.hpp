#pragma once

// The two inverse-network architectures, their label encodings, training on
// generated datasets, design from a target, and evaluation.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "metainv/codec.hpp"
#include "metainv/dataset.hpp"
#include "metainv/features.hpp"
#include "metainv/nn.hpp"
#include "metainv/surrogate.hpp"

namespace metainv {

/// non_restricted emits 1024 pixel probabilities; restricted emits 48 code bits.
enum class Variant { non_restricted, restricted };

std::string_view to_string(Variant v);
/// Accepts "restricted" and "non_restricted" (or "non-restricted").
Variant variant_from_string(std::string_view text);

struct ArchitectureSpec {
  Variant variant;
  std::vector<std::size_t> layer_dims;  // input width followed by each dense layer's output width
  std::vector<std::size_t> dropout_after;
  std::vector<Activation> activations;
};

ArchitectureSpec architecture(Variant v);

/// Freshly initialized network for the variant (Glorot weights from seed).
MlpModel build(Variant v, std::uint64_t seed = 42, double dropout_rate = 0.1);

/// Label column for one structure: encode_codes (restricted) or the flattened
/// assembled mask (non_restricted).
Eigen::VectorXd encode_label(Variant v, const UnitCellCodes& codes);
/// Network output to a legal structure: decode_bits or project_pixels_to_tiles.
UnitCellCodes decode_output(Variant v, const Eigen::VectorXd& output);

LabeledData to_labeled(Variant v, const Dataset& data);

struct InverseTraining {
  MlpModel model;
  /// Per-epoch MSE and bit accuracy; `validation` holds the test partition.
  std::vector<EpochRecord> history;
};

/// Builds the variant from config.rng_seed and trains it on `train`,
/// recording test-partition metrics every epoch.
InverseTraining train_inverse(Variant v, const Dataset& train, const Dataset& test, const TrainConfig& config,
                              const EpochCallback& on_epoch = {});

struct NotchError {
  std::size_t target_index = 0;
  std::size_t achieved_index = 0;
  double dfreq_ghz = 0.0;   // achieved - target
  double ddepth_db = 0.0;   // achieved - target
  double dbw_ghz = 0.0;     // achieved - target

  friend bool operator==(const NotchError&, const NotchError&) = default;
};

struct NotchMatch {
  std::vector<NotchError> matched;
  std::size_t missed = 0;    // target notches without an achieved partner
  std::size_t spurious = 0;  // achieved notches without a target partner

  friend bool operator==(const NotchMatch&, const NotchMatch&) = default;
};

inline constexpr double kMatchGateGhz = 1.5;

/// Greedy pairing by smallest frequency distance, each notch used once, pairs
/// farther apart than gate_ghz rejected.
NotchMatch match_notches(const DesignTarget& target, const DesignTarget& achieved, double gate_ghz = kMatchGateGhz);

struct DesignReport {
  DesignTarget target;
  UnitCellCodes codes;
  PixelMask mask;
  Spectrum spectrum;
  DesignTarget achieved;
  NotchMatch match;

  friend bool operator==(const DesignReport&, const DesignReport&) = default;
};

/// Forward pass on the target's feature vector, legalized per variant, then
/// assembled, simulated and re-extracted. Throws InvalidInput when the model
/// widths do not fit the variant.
DesignReport design(const MlpModel& model, Variant v, const DesignTarget& target, const SurrogateConfig& cfg = {});

struct Metrics {
  double bit_accuracy = 0.0;
  double tile_accuracy = 0.0;
  double mean_abs_dfreq_ghz = 0.0;
  double mean_abs_ddepth_db = 0.0;
  double mean_abs_dbw_ghz = 0.0;
  double count_match_rate = 0.0;
  std::size_t samples = 0;
  std::size_t matched_notches = 0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Scores precomputed network outputs (one column per sample) against the
/// dataset labels, and runs the round trip decode -> simulate -> extract ->
/// match against each sample's own notch target.
Metrics evaluate_outputs(Variant v, const Eigen::MatrixXd& outputs, const Dataset& data,
                         const SurrogateConfig& cfg = {});
Metrics evaluate(const MlpModel& model, Variant v, const Dataset& data, const SurrogateConfig& cfg = {});

/// Model bundle: the MSINN/1 weights file plus "<weights>.manifest.json".
struct ModelManifest {
  Variant variant = Variant::restricted;
  std::string dataset_digest;
  std::string surrogate_config_digest;
  TrainConfig train_config;
  double train_fraction = 0.7;
  std::uint64_t split_seed = 42;
  Metrics final_metrics;
  double final_train_loss = 0.0;
};

std::filesystem::path manifest_path(const std::filesystem::path& weights);
void save_bundle(const MlpModel& model, const ModelManifest& manifest, const std::filesystem::path& weights);
/// Throws DataError subclasses when either file is missing or inconsistent.
std::pair<MlpModel, ModelManifest> load_bundle(const std::filesystem::path& weights);

}  // namespace metainv
