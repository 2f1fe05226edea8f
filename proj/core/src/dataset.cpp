#include "metainv/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "metainv/digest.hpp"
#include "metainv/error.hpp"
#include "metainv/rng.hpp"

namespace metainv {

using nlohmann::json;

FeatureVector features_of(const UnitCellCodes& codes, const SurrogateConfig& cfg) {
  return target_to_vector(extract_notches(simulate(codes, cfg)));
}

Dataset generate(std::size_t n, std::uint64_t seed, const SurrogateConfig& cfg, bool canonical, bool store_spectra) {
  if (n == 0) throw InvalidInput("dataset size must be at least 1");
  cfg.validate();
  Dataset d;
  d.generator_seed = seed;
  d.surrogate_config_digest = cfg.digest();
  d.canonical_labels = canonical;
  d.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::substream(seed, i);
    std::array<int, kTileCount> drawn{};
    for (auto& c : drawn) c = static_cast<int>(rng.below(kTileCodeCount));
    UnitCellCodes codes(drawn);
    if (canonical) codes = codes.sorted();
    Spectrum spectrum = simulate(codes, cfg);
    Sample s;
    s.codes = codes;
    s.features = target_to_vector(extract_notches(spectrum));
    if (store_spectra) s.spectrum = std::move(spectrum);
    d.samples.push_back(std::move(s));
  }
  return d;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidInput(fmt::format("train fraction must lie in (0, 1), got {}", train_fraction));
  }
  const auto n = data.samples.size();
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  if (n_train == 0 || n_train == n) {
    throw InvalidInput(fmt::format("splitting {} samples at {} leaves one side empty", n, train_fraction));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  auto take = [&](std::size_t from, std::size_t to) {
    Dataset part;
    part.generator_seed = data.generator_seed;
    part.surrogate_config_digest = data.surrogate_config_digest;
    part.canonical_labels = data.canonical_labels;
    part.samples.reserve(to - from);
    for (std::size_t i = from; i < to; ++i) part.samples.push_back(data.samples[order[i]]);
    return part;
  };
  return {take(0, n_train), take(n_train, n)};
}

// ---------------------------------------------------------------------------
// MSDS/1

namespace {

void write_reals(std::ostream& out, const auto& values) {
  out << '[';
  bool first = true;
  for (double v : values) {
    if (!first) out << ',';
    first = false;
    out << fmt::format("{:.17g}", v);
  }
  out << ']';
}

void write_record(std::ostream& out, const Sample& s) {
  out << "{\"codes\":[";
  for (int t = 0; t < kTileCount; ++t) {
    if (t != 0) out << ',';
    out << s.codes[static_cast<std::size_t>(t)];
  }
  out << "],\"features\":";
  write_reals(out, s.features);
  if (s.spectrum) {
    out << ",\"spectrum\":";
    write_reals(out, s.spectrum->values());
  }
  out << "}\n";
}

std::vector<double> reals_field(const json& record, const char* key, std::size_t expected, std::size_t line) {
  const auto it = record.find(key);
  if (it == record.end() || !it->is_array() || it->size() != expected) {
    throw MalformedRecordError(line, fmt::format("\"{}\" must be an array of {} numbers", key, expected));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : *it) {
    if (!v.is_number()) throw MalformedRecordError(line, fmt::format("\"{}\" holds a non-number", key));
    out.push_back(v.get<double>());
  }
  return out;
}

Sample parse_record(const std::string& text, std::size_t line) {
  json record;
  try {
    record = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedRecordError(line, fmt::format("invalid record ({})", e.what()));
  }
  if (!record.is_object()) throw MalformedRecordError(line, "record is not an object");

  Sample s;
  const auto codes_it = record.find("codes");
  if (codes_it == record.end() || !codes_it->is_array() || codes_it->size() != kTileCount) {
    throw MalformedRecordError(line, "\"codes\" must be an array of 16 integers");
  }
  std::array<int, kTileCount> codes{};
  for (std::size_t t = 0; t < codes.size(); ++t) {
    const auto& v = (*codes_it)[t];
    if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() >= kTileCodeCount) {
      throw MalformedRecordError(line, "tile codes must be integers in 0..7");
    }
    codes[t] = v.get<int>();
  }
  s.codes = UnitCellCodes(codes);

  const auto features = reals_field(record, "features", kFeatureWidth, line);
  for (std::size_t i = 0; i < kFeatureWidth; ++i) {
    if (!(features[i] >= 0.0 && features[i] <= 1.0)) {
      throw MalformedRecordError(line, "features must lie in [0, 1]");
    }
    s.features[i] = features[i];
  }
  if (record.contains("spectrum")) {
    try {
      s.spectrum = Spectrum(reals_field(record, "spectrum", FrequencyGrid::size, line));
    } catch (const InvalidInput& e) {
      throw MalformedRecordError(line, e.what());
    }
  }
  return s;
}

}  // namespace

void save_dataset(const Dataset& data, std::ostream& out) {
  json header = {{"format", kDatasetFormat},
                 {"seed", data.generator_seed},
                 {"config_digest", data.surrogate_config_digest},
                 {"canonical", data.canonical_labels},
                 {"count", data.samples.size()}};
  out << header.dump() << '\n';
  for (const auto& s : data.samples) write_record(out, s);
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset file " + path.string());
  save_dataset(data, out);
  if (!out) throw DataError("failed writing dataset file " + path.string());
}

std::string dataset_digest(const Dataset& data) {
  std::ostringstream ss;
  save_dataset(data, ss);
  return content_digest(ss.str());
}

Dataset load_dataset(std::istream& in, const SurrogateConfig& cfg) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedRecordError(1, "missing dataset header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedRecordError(1, fmt::format("invalid header ({})", e.what()));
  }
  if (!header.is_object() || !header.contains("format") || !header["format"].is_string()) {
    throw MalformedRecordError(1, "header lacks a format tag");
  }
  if (header["format"].get<std::string>() != kDatasetFormat) {
    throw FormatVersionError(fmt::format("expected dataset format '{}', found '{}'", kDatasetFormat,
                                         header["format"].get<std::string>()));
  }
  Dataset d;
  std::size_t count = 0;
  try {
    d.generator_seed = header.at("seed").get<std::uint64_t>();
    d.surrogate_config_digest = header.at("config_digest").get<std::string>();
    d.canonical_labels = header.at("canonical").get<bool>();
    count = header.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw MalformedRecordError(1, fmt::format("bad header field ({})", e.what()));
  }
  if (d.surrogate_config_digest != cfg.digest()) {
    throw ConfigMismatchError(fmt::format("dataset was generated with surrogate config {}, expected {}",
                                          d.surrogate_config_digest, cfg.digest()));
  }

  std::size_t line_no = 1;
  d.samples.reserve(count);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw MalformedRecordError(line_no, "empty record");
    if (in.eof()) throw MalformedRecordError(line_no, "record is not newline-terminated (truncated file?)");
    d.samples.push_back(parse_record(line, line_no));
  }
  if (d.samples.size() != count) {
    throw MalformedRecordError(line_no + 1, fmt::format("header announces {} records, file holds {}", count,
                                                        d.samples.size()));
  }
  if (d.samples.empty()) throw MalformedRecordError(line_no, "dataset holds no samples");
  return d;
}

Dataset load_dataset(const std::filesystem::path& path, const SurrogateConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file " + path.string());
  return load_dataset(in, cfg);
}

}  // namespace metainv
