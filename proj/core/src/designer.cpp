#include "metainv/designer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "metainv/error.hpp"

namespace metainv {

using nlohmann::json;

std::string_view to_string(Variant v) {
  return v == Variant::restricted ? "restricted" : "non_restricted";
}

Variant variant_from_string(std::string_view text) {
  if (text == "restricted") return Variant::restricted;
  if (text == "non_restricted" || text == "non-restricted") return Variant::non_restricted;
  throw InvalidInput(fmt::format("unknown variant '{}' (expected restricted or non_restricted)", text));
}

ArchitectureSpec architecture(Variant v) {
  using enum Activation;
  if (v == Variant::restricted) {
    return {v, {24, 24, 500, 500, 500, 500, 48}, {0, 1, 2, 3}, {relu, relu, relu, relu, relu, sigmoid}};
  }
  return {v, {24, 24, 300, 300, 300, 300, 1024}, {0, 1, 2, 3, 4}, {relu, relu, relu, relu, relu, sigmoid}};
}

MlpModel build(Variant v, std::uint64_t seed, double dropout_rate) {
  const auto arch = architecture(v);
  return MlpModel::initialized(arch.layer_dims, arch.activations, arch.dropout_after, dropout_rate, seed);
}

Eigen::VectorXd encode_label(Variant v, const UnitCellCodes& codes) {
  if (v == Variant::restricted) {
    const auto bits = encode_codes(codes);
    return Eigen::Map<const Eigen::VectorXd>(bits.data(), kCodeBitCount);
  }
  const auto pixels = flatten_mask(assemble_unit_cell(codes));
  return Eigen::Map<const Eigen::VectorXd>(pixels.data(), kPixelCount);
}

UnitCellCodes decode_output(Variant v, const Eigen::VectorXd& output) {
  const std::span<const double> values(output.data(), static_cast<std::size_t>(output.size()));
  return v == Variant::restricted ? decode_bits(values) : project_pixels_to_tiles(values);
}

LabeledData to_labeled(Variant v, const Dataset& data) {
  const auto width = static_cast<Eigen::Index>(architecture(v).layer_dims.back());
  const auto n = static_cast<Eigen::Index>(data.size());
  LabeledData out{Eigen::MatrixXd(static_cast<Eigen::Index>(kFeatureWidth), n), Eigen::MatrixXd(width, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& s = data.samples[static_cast<std::size_t>(j)];
    out.inputs.col(j) = Eigen::Map<const Eigen::VectorXd>(s.features.data(), static_cast<Eigen::Index>(kFeatureWidth));
    out.targets.col(j) = encode_label(v, s.codes);
  }
  return out;
}

InverseTraining train_inverse(Variant v, const Dataset& train, const Dataset& test, const TrainConfig& config,
                              const EpochCallback& on_epoch) {
  if (train.size() == 0 || test.size() == 0) throw InvalidInput("train and test partitions must be non-empty");
  const LabeledData train_data = to_labeled(v, train);
  const LabeledData test_data = to_labeled(v, test);
  auto result = metainv::train(build(v, config.rng_seed, config.dropout_rate), train_data, config, &test_data,
                               on_epoch);
  return {std::move(result.model), std::move(result.history)};
}

NotchMatch match_notches(const DesignTarget& target, const DesignTarget& achieved, double gate_ghz) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t t = 0; t < target.notches.size(); ++t) {
    for (std::size_t a = 0; a < achieved.notches.size(); ++a) {
      const double d = std::abs(achieved.notches[a].freq_ghz - target.notches[t].freq_ghz);
      if (d <= gate_ghz) pairs.emplace_back(d, t, a);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> target_used(target.notches.size(), false);
  std::vector<bool> achieved_used(achieved.notches.size(), false);
  NotchMatch m;
  for (const auto& [d, t, a] : pairs) {
    if (target_used[t] || achieved_used[a]) continue;
    target_used[t] = achieved_used[a] = true;
    const auto& want = target.notches[t];
    const auto& got = achieved.notches[a];
    m.matched.push_back({t, a, got.freq_ghz - want.freq_ghz, got.depth_db - want.depth_db,
                         got.bandwidth_ghz - want.bandwidth_ghz});
  }
  std::sort(m.matched.begin(), m.matched.end(),
            [](const NotchError& x, const NotchError& y) { return x.target_index < y.target_index; });
  m.missed = static_cast<std::size_t>(std::count(target_used.begin(), target_used.end(), false));
  m.spurious = static_cast<std::size_t>(std::count(achieved_used.begin(), achieved_used.end(), false));
  return m;
}

namespace {

void check_model(const MlpModel& model, Variant v) {
  const auto arch = architecture(v);
  if (model.empty() || model.input_dim() != kFeatureWidth || model.output_dim() != arch.layer_dims.back()) {
    throw InvalidInput(fmt::format("model does not fit the {} variant (expects {} -> {})", to_string(v),
                                   kFeatureWidth, arch.layer_dims.back()));
  }
}

}  // namespace

DesignReport design(const MlpModel& model, Variant v, const DesignTarget& target, const SurrogateConfig& cfg) {
  check_model(model, v);
  const FeatureVector features = target_to_vector(target);
  const Eigen::VectorXd input = Eigen::Map<const Eigen::VectorXd>(features.data(), kFeatureWidth);
  DesignReport report;
  report.target = target;
  report.codes = decode_output(v, model.predict(input));
  report.mask = assemble_unit_cell(report.codes);
  report.spectrum = simulate(report.codes, cfg);
  report.achieved = extract_notches(report.spectrum);
  report.match = match_notches(target, report.achieved);
  return report;
}

Metrics evaluate_outputs(Variant v, const Eigen::MatrixXd& outputs, const Dataset& data, const SurrogateConfig& cfg) {
  if (data.size() == 0) throw InvalidInput("cannot evaluate on an empty dataset");
  if (outputs.cols() != static_cast<Eigen::Index>(data.size()) ||
      outputs.rows() != static_cast<Eigen::Index>(architecture(v).layer_dims.back())) {
    throw InvalidInput("network outputs do not match the dataset/variant");
  }
  Metrics m;
  m.samples = data.size();
  double bit_sum = 0.0;
  std::size_t tiles_right = 0;
  std::size_t count_matches = 0;
  double dfreq = 0.0, ddepth = 0.0, dbw = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& sample = data.samples[i];
    const Eigen::VectorXd out = outputs.col(static_cast<Eigen::Index>(i));
    const Eigen::VectorXd label = encode_label(v, sample.codes);
    bit_sum += binary_accuracy(std::span<const double>(out.data(), static_cast<std::size_t>(out.size())),
                               std::span<const double>(label.data(), static_cast<std::size_t>(label.size())));
    const UnitCellCodes predicted = decode_output(v, out);
    for (std::size_t t = 0; t < kTileCount; ++t) tiles_right += predicted[t] == sample.codes[t] ? 1 : 0;

    const DesignTarget target = vector_to_target(sample.features);
    const DesignTarget achieved = extract_notches(simulate(predicted, cfg));
    count_matches += achieved.size() == target.size() ? 1 : 0;
    for (const auto& e : match_notches(target, achieved).matched) {
      dfreq += std::abs(e.dfreq_ghz);
      ddepth += std::abs(e.ddepth_db);
      dbw += std::abs(e.dbw_ghz);
      ++m.matched_notches;
    }
  }
  const auto n = static_cast<double>(data.size());
  m.bit_accuracy = bit_sum / n;
  m.tile_accuracy = static_cast<double>(tiles_right) / (n * kTileCount);
  m.count_match_rate = static_cast<double>(count_matches) / n;
  if (m.matched_notches > 0) {
    const auto k = static_cast<double>(m.matched_notches);
    m.mean_abs_dfreq_ghz = dfreq / k;
    m.mean_abs_ddepth_db = ddepth / k;
    m.mean_abs_dbw_ghz = dbw / k;
  }
  return m;
}

Metrics evaluate(const MlpModel& model, Variant v, const Dataset& data, const SurrogateConfig& cfg) {
  check_model(model, v);
  return evaluate_outputs(v, model.predict_batch(to_labeled(v, data).inputs), data, cfg);
}

// ---------------------------------------------------------------------------
// bundle

namespace {

json metrics_json(const Metrics& m) {
  return {{"bit_accuracy", m.bit_accuracy},
          {"tile_accuracy", m.tile_accuracy},
          {"mean_abs_dfreq_ghz", m.mean_abs_dfreq_ghz},
          {"mean_abs_ddepth_db", m.mean_abs_ddepth_db},
          {"mean_abs_dbw_ghz", m.mean_abs_dbw_ghz},
          {"count_match_rate", m.count_match_rate},
          {"samples", m.samples},
          {"matched_notches", m.matched_notches}};
}

Metrics metrics_from(const json& j) {
  Metrics m;
  m.bit_accuracy = j.at("bit_accuracy").get<double>();
  m.tile_accuracy = j.at("tile_accuracy").get<double>();
  m.mean_abs_dfreq_ghz = j.at("mean_abs_dfreq_ghz").get<double>();
  m.mean_abs_ddepth_db = j.at("mean_abs_ddepth_db").get<double>();
  m.mean_abs_dbw_ghz = j.at("mean_abs_dbw_ghz").get<double>();
  m.count_match_rate = j.at("count_match_rate").get<double>();
  m.samples = j.at("samples").get<std::size_t>();
  m.matched_notches = j.at("matched_notches").get<std::size_t>();
  return m;
}

}  // namespace

std::filesystem::path manifest_path(const std::filesystem::path& weights) {
  auto p = weights;
  p += ".manifest.json";
  return p;
}

void save_bundle(const MlpModel& model, const ModelManifest& manifest, const std::filesystem::path& weights) {
  check_model(model, manifest.variant);
  save_model(model, weights);
  const auto& tc = manifest.train_config;
  json j = {{"format", "MSINN-BUNDLE/1"},
            {"weights_format", kModelFormat},
            {"weights_file", weights.filename().string()},
            {"variant", to_string(manifest.variant)},
            {"dataset_digest", manifest.dataset_digest},
            {"surrogate_config_digest", manifest.surrogate_config_digest},
            {"train_config",
             {{"batch_size", tc.batch_size},
              {"learning_rate", tc.learning_rate},
              {"epochs", tc.epochs},
              {"rng_seed", tc.rng_seed},
              {"dropout_rate", tc.dropout_rate}}},
            {"train_fraction", manifest.train_fraction},
            {"split_seed", manifest.split_seed},
            {"final_train_loss", manifest.final_train_loss},
            {"final_metrics", metrics_json(manifest.final_metrics)}};
  std::ofstream out(manifest_path(weights), std::ios::binary);
  if (!out) throw DataError("cannot write manifest " + manifest_path(weights).string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing manifest " + manifest_path(weights).string());
}

std::pair<MlpModel, ModelManifest> load_bundle(const std::filesystem::path& weights) {
  const auto mpath = manifest_path(weights);
  std::ifstream in(mpath, std::ios::binary);
  if (!in) throw DataError("cannot open manifest " + mpath.string());
  ModelManifest m;
  try {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != "MSINN-BUNDLE/1") {
      throw FormatVersionError("unsupported manifest format " + j.at("format").get<std::string>());
    }
    m.variant = variant_from_string(j.at("variant").get<std::string>());
    m.dataset_digest = j.at("dataset_digest").get<std::string>();
    m.surrogate_config_digest = j.at("surrogate_config_digest").get<std::string>();
    const auto& tc = j.at("train_config");
    m.train_config.batch_size = tc.at("batch_size").get<std::size_t>();
    m.train_config.learning_rate = tc.at("learning_rate").get<double>();
    m.train_config.epochs = tc.at("epochs").get<std::size_t>();
    m.train_config.rng_seed = tc.at("rng_seed").get<std::uint64_t>();
    m.train_config.dropout_rate = tc.at("dropout_rate").get<double>();
    m.train_fraction = j.at("train_fraction").get<double>();
    m.split_seed = j.at("split_seed").get<std::uint64_t>();
    m.final_train_loss = j.at("final_train_loss").get<double>();
    m.final_metrics = metrics_from(j.at("final_metrics"));
  } catch (const json::exception& e) {
    throw DataError(fmt::format("malformed manifest {}: {}", mpath.string(), e.what()));
  } catch (const InvalidInput& e) {
    throw DataError(fmt::format("malformed manifest {}: {}", mpath.string(), e.what()));
  }
  MlpModel model = load_model(weights);
  try {
    check_model(model, m.variant);
  } catch (const InvalidInput& e) {
    throw ConfigMismatchError(e.what());
  }
  return {std::move(model), m};
}

}  // namespace metainv
