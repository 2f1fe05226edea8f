#include "metainv/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "metainv/digest.hpp"
#include "metainv/error.hpp"

namespace metainv {

Spectrum::Spectrum(std::vector<double> values_db) : values_(std::move(values_db)) {
  if (values_.size() != FrequencyGrid::size) {
    throw InvalidInput(fmt::format("a spectrum has {} samples, got {}", FrequencyGrid::size, values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v > 0.0) throw InvalidInput("spectrum values must be finite and <= 0 dB");
  }
}

void SurrogateConfig::validate() const {
  for (std::size_t k = 0; k < centers_ghz.size(); ++k) {
    const double f = centers_ghz[k];
    if (!(f > FrequencyGrid::start_ghz && f < FrequencyGrid::stop_ghz)) {
      throw InvalidInput(fmt::format("center {} GHz lies outside the band", f));
    }
    if (k > 0 && !(f > centers_ghz[k - 1])) throw InvalidInput("centers must be strictly increasing");
  }
  if (!(halfwidth_ghz > 0.0) || !std::isfinite(halfwidth_ghz)) throw InvalidInput("half-width must be positive");
  if (!(max_depth_db > 0.0) || !std::isfinite(max_depth_db)) throw InvalidInput("max depth must be positive");
}

std::string SurrogateConfig::canonical_text() const {
  std::string s = "surrogate/1;centers=";
  for (std::size_t k = 0; k < centers_ghz.size(); ++k) {
    if (k != 0) s += ',';
    s += fmt::format("{:.17g}", centers_ghz[k]);
  }
  s += fmt::format(";halfwidth={:.17g};max_depth={:.17g};grid={:.17g}:{:.17g}:{:.17g}", halfwidth_ghz,
                   max_depth_db, FrequencyGrid::start_ghz, FrequencyGrid::step_ghz, FrequencyGrid::stop_ghz);
  return s;
}

std::string SurrogateConfig::digest() const { return content_digest(canonical_text()); }

TileCounts tile_counts(const UnitCellCodes& cell) {
  TileCounts n{};
  for (auto code : cell.codes()) ++n[code];
  return n;
}

double notch_depth_db(int count, const SurrogateConfig& cfg) {
  if (count <= 0) return 0.0;
  return -cfg.max_depth_db * (1.0 - std::exp(-static_cast<double>(count) / 2.0));
}

double reflection_db(const TileCounts& counts, double freq_ghz, const SurrogateConfig& cfg) {
  const double g2 = cfg.halfwidth_ghz * cfg.halfwidth_ghz;
  double r = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double d = freq_ghz - cfg.centers_ghz[k];
    r += notch_depth_db(counts[k], cfg) * g2 / (d * d + g2);
  }
  return r;
}

Spectrum simulate_counts(const TileCounts& counts, const SurrogateConfig& cfg) {
  cfg.validate();
  std::vector<double> values(FrequencyGrid::size);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = reflection_db(counts, FrequencyGrid::frequency(i), cfg);
  }
  return Spectrum(std::move(values));
}

Spectrum simulate(const UnitCellCodes& cell, const SurrogateConfig& cfg) {
  return simulate_counts(tile_counts(cell), cfg);
}

AnalyticNotch analytic_notch(const UnitCellCodes& cell, int code, const SurrogateConfig& cfg) {
  cfg.validate();
  pattern_bitmap(code);  // range check
  const TileCounts counts = tile_counts(cell);
  const auto k = static_cast<std::size_t>(code);
  if (counts[k] == 0) throw InvalidInput(fmt::format("code {} does not occur in the cell", code));

  AnalyticNotch notch;
  notch.freq_ghz = cfg.centers_ghz[k];
  const double own = notch_depth_db(counts[k], cfg);
  notch.depth_db = reflection_db(counts, notch.freq_ghz, cfg);
  notch.neighbor_db = notch.depth_db - own;
  notch.isolated = std::abs(notch.neighbor_db) < 0.5;
  if (notch.depth_db < -10.0) {
    notch.bandwidth_ghz = 2.0 * cfg.halfwidth_ghz * std::sqrt(notch.depth_db / -10.0 - 1.0);
  }
  return notch;
}

void write_spectrum_csv(const Spectrum& spectrum, std::ostream& out) {
  out << "frequency_ghz,reflection_db\n";
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    out << fmt::format("{:.17g},{:.17g}\n", spectrum.frequency(i), spectrum[i]);
  }
}

void write_spectrum_svg(const Spectrum& spectrum, std::ostream& out, const std::string& title) {
  constexpr double width = 800, height = 420;
  constexpr double left = 70, right = 20, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  const double lowest = *std::min_element(spectrum.values().begin(), spectrum.values().end());
  const double y_min = std::min(-10.0, 10.0 * std::floor(lowest / 10.0));
  auto x_of = [&](double f) {
    return left + plot_w * (f - FrequencyGrid::start_ghz) / (FrequencyGrid::stop_ghz - FrequencyGrid::start_ghz);
  };
  auto y_of = [&](double db) { return top + plot_h * (db / y_min); };

  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)",
                     width, height, width, height)
      << '\n';
  out << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  out << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)", left, top,
                     plot_w, plot_h)
      << '\n';
  for (int f = 5; f <= 45; f += 5) {
    const double x = x_of(f);
    out << fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{0:.2f}" y2="{2:.2f}" stroke="black"/>)", x,
                       top + plot_h, top + plot_h + 5)
        << '\n';
    out << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="12" text-anchor="middle">{}</text>)", x,
                       top + plot_h + 20, f)
        << '\n';
  }
  for (double db = 0.0; db >= y_min - 1e-9; db -= 10.0) {
    const double y = y_of(db);
    out << fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{2:.2f}" y2="{1:.2f}" stroke="#ccc"/>)", left, y,
                       left + plot_w)
        << '\n';
    out << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="12" text-anchor="end">{:g}</text>)", left - 8,
                       y + 4, db)
        << '\n';
  }
  out << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="13" text-anchor="middle">Frequency (GHz)</text>)",
                     left + plot_w / 2, height - 10)
      << '\n';
  out << fmt::format(
             R"svg(<text x="16" y="{:.2f}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2f})">Reflection (dB)</text>)svg",
             top + plot_h / 2, top + plot_h / 2)
      << '\n';
  if (!title.empty()) {
    out << fmt::format(R"(<text x="{:.2f}" y="24" font-size="14" text-anchor="middle">{}</text>)",
                       left + plot_w / 2, title)
        << '\n';
  }
  out << R"(<polyline fill="none" stroke="#1f4e9c" stroke-width="1.5" points=")";
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (i != 0) out << ' ';
    out << fmt::format("{:.2f},{:.2f}", x_of(spectrum.frequency(i)), y_of(spectrum[i]));
  }
  out << "\"/>\n</svg>\n";
}

}  // namespace metainv
