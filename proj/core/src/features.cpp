#include "metainv/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "metainv/error.hpp"

namespace metainv {

namespace {

constexpr double kBandSpanGhz = FrequencyGrid::stop_ghz - FrequencyGrid::start_ghz;
constexpr double kLiveDepthNorm = -kNotchThresholdDb / kDepthCapDb;  // 0.2

struct Run {
  std::size_t first;
  std::size_t last;  // inclusive
};

// Frequency where the straight line between samples a and b reaches level.
double crossing(const Spectrum& s, std::size_t a, std::size_t b, double level) {
  const double fa = s.frequency(a);
  const double fb = s.frequency(b);
  const double va = s[a];
  const double vb = s[b];
  return fa + (level - va) / (vb - va) * (fb - fa);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token) {
  token = trim(token);
  // from_chars rejects a leading '+'.
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
    throw InvalidInput(fmt::format("'{}' is not a number", token));
  }
  return v;
}

}  // namespace

void DesignTarget::validate() const {
  if (notches.size() > kMaxNotches) {
    throw InvalidInput(fmt::format("a target holds at most {} notches, got {}", kMaxNotches, notches.size()));
  }
  for (std::size_t i = 0; i < notches.size(); ++i) {
    const auto& n = notches[i];
    if (!(n.freq_ghz >= FrequencyGrid::start_ghz && n.freq_ghz <= FrequencyGrid::stop_ghz)) {
      throw InvalidInput(fmt::format("notch frequency {} GHz lies outside 4..45 GHz", n.freq_ghz));
    }
    if (!(n.depth_db < kNotchThresholdDb) || !std::isfinite(n.depth_db)) {
      throw InvalidInput(fmt::format("notch depth {} dB is not below -10 dB", n.depth_db));
    }
    if (!(n.bandwidth_ghz > 0.0) || !std::isfinite(n.bandwidth_ghz)) {
      throw InvalidInput(fmt::format("notch bandwidth {} GHz must be positive", n.bandwidth_ghz));
    }
    if (i > 0 && !(n.freq_ghz > notches[i - 1].freq_ghz)) {
      throw InvalidInput("notch frequencies must be strictly increasing");
    }
  }
}

DesignTarget extract_notches(const Spectrum& spectrum, double threshold_db) {
  std::vector<Run> runs;
  const std::size_t n = spectrum.size();
  for (std::size_t i = 0; i < n;) {
    if (spectrum[i] < threshold_db) {
      std::size_t j = i;
      while (j + 1 < n && spectrum[j + 1] < threshold_db) ++j;
      runs.push_back({i, j});
      i = j + 1;
    } else {
      ++i;
    }
  }

  std::vector<Notch> notches;
  notches.reserve(runs.size());
  for (const auto& run : runs) {
    std::size_t lowest = run.first;
    for (std::size_t i = run.first + 1; i <= run.last; ++i) {
      if (spectrum[i] < spectrum[lowest]) lowest = i;
    }
    const double lo = run.first == 0 ? spectrum.frequency(0) : crossing(spectrum, run.first - 1, run.first, threshold_db);
    const double hi =
        run.last + 1 == n ? spectrum.frequency(n - 1) : crossing(spectrum, run.last, run.last + 1, threshold_db);
    notches.push_back({spectrum.frequency(lowest), spectrum[lowest], hi - lo});
  }

  if (notches.size() > kMaxNotches) {
    std::stable_sort(notches.begin(), notches.end(),
                     [](const Notch& a, const Notch& b) { return a.depth_db < b.depth_db; });
    notches.resize(kMaxNotches);
    std::sort(notches.begin(), notches.end(),
              [](const Notch& a, const Notch& b) { return a.freq_ghz < b.freq_ghz; });
  }
  return DesignTarget{std::move(notches)};
}

FeatureVector target_to_vector(const DesignTarget& target) {
  target.validate();
  FeatureVector v{};
  for (std::size_t i = 0; i < target.notches.size(); ++i) {
    const auto& n = target.notches[i];
    v[3 * i] = (n.freq_ghz - FrequencyGrid::start_ghz) / kBandSpanGhz;
    v[3 * i + 1] = std::min(-n.depth_db, kDepthCapDb) / kDepthCapDb;
    v[3 * i + 2] = std::min(n.bandwidth_ghz, kBandwidthCapGhz) / kBandwidthCapGhz;
  }
  return v;
}

DesignTarget vector_to_target(std::span<const double> values) {
  if (values.size() != kFeatureWidth) {
    throw InvalidInput(fmt::format("feature vector has {} entries, expected {}", values.size(), kFeatureWidth));
  }
  DesignTarget t;
  for (std::size_t slot = 0; slot < kMaxNotches; ++slot) {
    if (values[3 * slot + 1] > kLiveDepthNorm) {
      t.notches.push_back({FrequencyGrid::start_ghz + values[3 * slot] * kBandSpanGhz,
                           -values[3 * slot + 1] * kDepthCapDb, values[3 * slot + 2] * kBandwidthCapGhz});
    }
  }
  std::stable_sort(t.notches.begin(), t.notches.end(),
                   [](const Notch& a, const Notch& b) { return a.freq_ghz < b.freq_ghz; });
  t.notches.erase(std::unique(t.notches.begin(), t.notches.end(),
                              [](const Notch& a, const Notch& b) { return a.freq_ghz == b.freq_ghz; }),
                  t.notches.end());
  return t;
}

DesignTarget parse_target(std::string_view text) {
  DesignTarget t;
  if (trim(text).empty()) return t;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    const auto item = trim(text.substr(start, end - start));
    if (item.empty()) {
      // tolerate a trailing separator only
      if (end != text.size()) throw InvalidInput("empty notch in target");
      break;
    }
    std::array<double, 3> fields{};
    std::size_t field_start = 0;
    for (std::size_t f = 0; f < 3; ++f) {
      const auto comma = item.find(',', field_start);
      if ((f < 2) == (comma == std::string_view::npos)) {
        throw InvalidInput(fmt::format("notch '{}' must be \"freq,depth,bw\"", item));
      }
      const auto stop = f < 2 ? comma : item.size();
      fields[f] = parse_number(item.substr(field_start, stop - field_start));
      field_start = stop + 1;
    }
    t.notches.push_back({fields[0], fields[1], fields[2]});
    start = end + 1;
  }
  std::sort(t.notches.begin(), t.notches.end(),
            [](const Notch& a, const Notch& b) { return a.freq_ghz < b.freq_ghz; });
  t.validate();
  return t;
}

std::string format_target(const DesignTarget& target) {
  std::string s;
  for (const auto& n : target.notches) {
    if (!s.empty()) s += ';';
    s += fmt::format("{:g},{:g},{:g}", n.freq_ghz, n.depth_db, n.bandwidth_ghz);
  }
  return s;
}

}  // namespace metainv
