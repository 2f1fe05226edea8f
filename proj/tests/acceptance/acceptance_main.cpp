// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails. Training progress goes to stderr.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "metainv/codec.hpp"
#include "metainv/dataset.hpp"
#include "metainv/designer.hpp"
#include "metainv/features.hpp"
#include "metainv/nn.hpp"
#include "metainv/rng.hpp"
#include "metainv/surrogate.hpp"
#include "oracles.hpp"

namespace {

using namespace metainv;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0 = no runtime bound
  std::function<Outcome()> body;
};

// ---- criterion 1 -----------------------------------------------------------

Outcome architecture_conformance() {
  const MlpModel r = build(Variant::restricted);
  const MlpModel n = build(Variant::non_restricted);
  const std::vector<std::size_t> r_params = {600, 12500, 250500, 250500, 250500, 24048};
  const std::vector<std::size_t> r_widths = {24, 500, 500, 500, 500, 48};
  const std::vector<std::size_t> n_widths = {24, 300, 300, 300, 300, 1024};
  std::vector<std::string> issues;
  if (r.layers().size() != r_params.size()) issues.push_back("restricted layer count");
  if (n.layers().size() != n_widths.size()) issues.push_back("non_restricted layer count");
  for (std::size_t k = 0; k < r.layers().size() && k < r_params.size(); ++k) {
    if (r.layers()[k].parameter_count() != r_params[k])
      issues.push_back(fmt::format("restricted dense_{} params {}", k + 1, r.layers()[k].parameter_count()));
    if (r.layers()[k].out_dim != r_widths[k]) issues.push_back(fmt::format("restricted dense_{} width", k + 1));
  }
  for (std::size_t k = 0; k < n.layers().size() && k < n_widths.size(); ++k) {
    if (n.layers()[k].out_dim != n_widths[k]) issues.push_back(fmt::format("non_restricted dense_{} width", k + 1));
  }
  if (issues.empty()) return {true, "6/6 restricted parameter counts, 12/12 output widths"};
  std::string joined;
  for (const auto& s : issues) joined += s + "; ";
  return {false, joined};
}

// ---- criterion 2 -----------------------------------------------------------

Outcome gradient_correctness() {
  Rng rng(2024);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t in = 2 + rng.below(23);      // 2..24
    const std::size_t hidden = 2 + rng.below(31);  // 2..32
    const std::size_t out = 2 + rng.below(47);     // 2..48
    const std::vector<std::size_t> dims = {in, hidden, out};
    const std::vector<Activation> acts = {Activation::relu, Activation::sigmoid};
    const bool with_dropout = trial % 2 == 1;
    MlpModel m = MlpModel::initialized(dims, acts, with_dropout ? std::vector<std::size_t>{0} : std::vector<std::size_t>{},
                                       with_dropout ? 0.2 : 0.0, 100 + static_cast<std::uint64_t>(trial));
    for (auto& layer : m.layers())
      for (Eigen::Index i = 0; i < layer.biases.size(); ++i) layer.biases(i) = rng.uniform(-0.1, 0.1);

    const Eigen::Index batch = 3;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(in), batch);
    Eigen::MatrixXd t(static_cast<Eigen::Index>(out), batch);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = static_cast<double>(rng.below(2));

    Rng dropout_rng(500 + static_cast<std::uint64_t>(trial));
    const ForwardCache cache = m.forward(x, with_dropout ? &dropout_rng : nullptr);
    const Gradients g = backward(m, cache, t);
    const auto check = testing::finite_difference_check(m, g, x, t, cache.masks);
    worst = std::max(worst, check.worst_relative_error);
    checked += check.checked;
  }
  return {worst <= 1e-4, fmt::format("20 models, {} parameters, worst relative error {:.3e}", checked, worst)};
}

// ---- criterion 3 -----------------------------------------------------------

Outcome codec_round_trips() {
  Rng rng(33);
  std::size_t failures = 0;
  auto random_cell = [&] {
    std::array<int, kTileCount> c{};
    for (auto& v : c) v = static_cast<int>(rng.below(kTileCodeCount));
    return UnitCellCodes(c);
  };
  for (int i = 0; i < 10000; ++i) {
    const auto cell = random_cell();
    failures += decode_bits(encode_codes(cell)) != cell;
  }
  for (int code = 0; code < kTileCodeCount; ++code) {
    const auto cell = UnitCellCodes::uniform(code);
    failures += decode_bits(encode_codes(cell)) != cell;
  }
  std::size_t projection_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto cell = random_cell();
    projection_failures += project_pixels_to_tiles(flatten_mask(assemble_unit_cell(cell))) != cell;
  }
  return {failures == 0 && projection_failures == 0,
          fmt::format("bits: {} failures in 10008 cells; projection: {} failures in 1000 cells", failures,
                      projection_failures)};
}

// ---- criterion 4 -----------------------------------------------------------

Outcome featurizer_oracle_agreement() {
  double worst_f = 0.0, worst_d = 0.0, worst_bw = 0.0;
  bool counts_ok = true;
  for (int code = 0; code < kTileCodeCount; ++code) {
    const auto cell = UnitCellCodes::uniform(code);
    const AnalyticNotch oracle = analytic_notch(cell, code);
    const DesignTarget t = extract_notches(simulate(cell));
    if (t.size() != 1 || !oracle.bandwidth_ghz) {
      counts_ok = false;
      continue;
    }
    worst_f = std::max(worst_f, std::abs(t.notches[0].freq_ghz - oracle.freq_ghz));
    worst_d = std::max(worst_d, std::abs(t.notches[0].depth_db - oracle.depth_db));
    worst_bw = std::max(worst_bw, std::abs(t.notches[0].bandwidth_ghz - *oracle.bandwidth_ghz));
  }
  const bool pass = counts_ok && worst_f <= 0.05 && worst_d <= 0.05 && worst_bw <= 0.1;
  return {pass, fmt::format("8 cells, worst |df| {:.4f} GHz, |dd| {:.4f} dB, |dbw| {:.4f} GHz{}", worst_f, worst_d,
                            worst_bw, counts_ok ? "" : ", notch count mismatch")};
}

// ---- criteria 5, 6, 8 -----------------------------------------------------

struct VariantRun {
  InverseTraining training;
  Metrics holdout;
};

struct Standard {
  Dataset train;
  Dataset test;
};

Standard standard_split() {
  const Dataset data = generate(2000, 42, {}, true);
  auto [train, test] = split(data, 0.7, 42);
  return {std::move(train), std::move(test)};
}

TrainConfig standard_config() {
  TrainConfig cfg;
  cfg.epochs = 3000;
  cfg.batch_size = 30;
  cfg.learning_rate = 1e-3;
  cfg.dropout_rate = 0.1;
  cfg.rng_seed = 42;
  return cfg;
}

VariantRun train_variant(Variant v, const Standard& s, const std::string& tag) {
  const auto start = std::chrono::steady_clock::now();
  auto progress = [&](std::size_t epoch, const EpochRecord& r) {
    if (epoch == 1 || epoch % 250 == 0) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cerr << fmt::format("  [{} {}] epoch {:5d} loss {:.6f} acc {:.4f} test acc {:.4f} ({:.0f} s)\n", tag,
                               to_string(v), epoch, r.train.loss, r.train.accuracy,
                               r.validation ? r.validation->accuracy : 0.0, elapsed);
    }
  };
  VariantRun run{train_inverse(v, s.train, s.test, standard_config(), progress), {}};
  run.holdout = evaluate(run.training.model, v, s.test);
  return run;
}

struct DesignFidelity {
  std::vector<DesignReport> reports;
  double mean_abs_dfreq = 0.0;
  double count_match_rate = 0.0;
  std::size_t matched = 0;
};

DesignFidelity round_trip_designs(const MlpModel& model, const Dataset& test) {
  DesignFidelity out;
  double sum_df = 0.0;
  std::size_t count_matches = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const DesignTarget target = extract_notches(simulate(test.samples[i].codes));
    DesignReport r = design(model, Variant::restricted, target);
    for (const auto& e : r.match.matched) sum_df += std::abs(e.dfreq_ghz);
    out.matched += r.match.matched.size();
    count_matches += r.achieved.size() == target.size();
    out.reports.push_back(std::move(r));
  }
  out.mean_abs_dfreq = out.matched ? sum_df / static_cast<double>(out.matched) : 0.0;
  out.count_match_rate = static_cast<double>(count_matches) / 20.0;
  return out;
}

struct Pipeline {
  Standard data;
  std::optional<VariantRun> restricted;
  std::optional<VariantRun> non_restricted;
  std::optional<DesignFidelity> fidelity;
};

Pipeline& pipeline() {
  static Pipeline p{standard_split(), {}, {}, {}};
  return p;
}

Outcome learning_regime() {
  auto& p = pipeline();
  p.restricted = train_variant(Variant::restricted, p.data, "run 1");
  p.non_restricted = train_variant(Variant::non_restricted, p.data, "run 1");
  bool pass = true;
  std::string detail;
  for (const auto* run : {&*p.restricted, &*p.non_restricted}) {
    const auto& h = run->training.history;
    const double first = h.front().train.loss;
    const double last = h.back().train.loss;
    const bool acc_ok = run->holdout.bit_accuracy >= 0.90;
    const bool loss_ok = last < 0.25 * first;
    pass = pass && acc_ok && loss_ok;
    const Variant v = run == &*p.restricted ? Variant::restricted : Variant::non_restricted;
    detail += fmt::format("{}: held-out bit acc {:.4f}{}, tile acc {:.4f}, loss {:.5f} -> {:.5f} ({:.1f}%){}; ",
                          to_string(v), run->holdout.bit_accuracy, acc_ok ? "" : " (< 0.90)",
                          run->holdout.tile_accuracy, first, last, 100.0 * last / first, loss_ok ? "" : " (>= 25%)");
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Outcome design_fidelity() {
  auto& p = pipeline();
  if (!p.restricted) return {false, "restricted model unavailable"};
  p.fidelity = round_trip_designs(p.restricted->training.model, p.data.test);
  const auto& f = *p.fidelity;
  const bool pass = f.mean_abs_dfreq <= 1.0 && f.count_match_rate >= 0.8 && f.matched > 0;
  return {pass, fmt::format("20 targets, {} matched notches, mean |df| {:.4f} GHz, count match rate {:.2f}", f.matched,
                            f.mean_abs_dfreq, f.count_match_rate)};
}

Outcome determinism() {
  auto& p = pipeline();
  if (!p.restricted || !p.non_restricted || !p.fidelity) return {false, "first run unavailable"};
  const VariantRun r2 = train_variant(Variant::restricted, p.data, "run 2");
  const VariantRun n2 = train_variant(Variant::non_restricted, p.data, "run 2");
  const DesignFidelity f2 = round_trip_designs(r2.training.model, p.data.test);
  std::vector<std::string> diffs;
  if (!(r2.training.model == p.restricted->training.model)) diffs.push_back("restricted weights");
  if (r2.training.history != p.restricted->training.history) diffs.push_back("restricted history");
  if (r2.holdout != p.restricted->holdout) diffs.push_back("restricted metrics");
  if (!(n2.training.model == p.non_restricted->training.model)) diffs.push_back("non_restricted weights");
  if (n2.training.history != p.non_restricted->training.history) diffs.push_back("non_restricted history");
  if (n2.holdout != p.non_restricted->holdout) diffs.push_back("non_restricted metrics");
  if (f2.reports != p.fidelity->reports) diffs.push_back("design reports");
  if (f2.mean_abs_dfreq != p.fidelity->mean_abs_dfreq || f2.count_match_rate != p.fidelity->count_match_rate)
    diffs.push_back("design metrics");
  if (diffs.empty()) return {true, "weights, histories, held-out metrics and 20 design reports identical"};
  std::string joined;
  for (const auto& d : diffs) joined += d + " differ; ";
  joined.resize(joined.size() - 2);
  return {false, joined};
}

// ---- criterion 7 -----------------------------------------------------------

Outcome smoke_targets() {
  auto& p = pipeline();
  if (!p.restricted) return {false, "restricted model unavailable"};
  const MlpModel& model = p.restricted->training.model;
  const SurrogateConfig cfg;
  auto near_center = [&](double f) {
    for (double c : cfg.centers_ghz)
      if (std::abs(f - c) <= 1.5) return true;
    return false;
  };
  bool pass = true;
  std::string detail;
  for (const char* text : {"15,-15,0.5", "5.8,-25,0.2", "18.5,-20,0.5"}) {
    const DesignTarget t = parse_target(text);
    const DesignReport r = design(model, Variant::restricted, t);
    const double f = t.notches[0].freq_ghz;
    std::optional<double> nearest;
    for (const auto& a : r.achieved.notches)
      if (!nearest || std::abs(a.freq_ghz - f) < std::abs(*nearest - f)) nearest = a.freq_ghz;
    bool ok = false;
    if (near_center(f)) {
      ok = nearest && std::abs(*nearest - f) <= 1.5 && r.match.matched.size() == 1;
    } else {
      ok = r.match.missed == 1 && r.match.matched.empty();
    }
    pass = pass && ok;
    detail += fmt::format("\"{}\" -> {} {} (nearest achieved {}); ", text, format_codes(r.codes),
                          r.match.matched.empty() ? "missed" : "matched",
                          nearest ? fmt::format("{:.2f} GHz", *nearest) : std::string("none"));
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criterion ids; criteria 6-8 reuse the models trained by 5.
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  const std::vector<Criterion> criteria = {
      {1, "architecture conformance", 1.0, architecture_conformance},
      {2, "gradient correctness", 30.0, gradient_correctness},
      {3, "codec round trips", 0.0, codec_round_trips},
      {4, "surrogate/featurizer oracle agreement", 5.0, featurizer_oracle_agreement},
      {5, "learning regime", 0.0, learning_regime},
      {6, "round-trip design fidelity", 60.0, design_fidelity},
      {7, "single-notch smoke targets", 0.0, smoke_targets},
      {8, "determinism", 0.0, determinism},
  };
  int failed = 0;
  std::size_t ran = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && seconds >= c.budget_s) {
      o.pass = false;
      o.detail += fmt::format("; runtime over {:.0f} s budget", c.budget_s);
    }
    failed += o.pass ? 0 : 1;
    std::cout << fmt::format("{} criterion {} ({}): {} [{:.2f} s]", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail,
                             seconds)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", ran - static_cast<std::size_t>(failed), ran)
            << std::endl;
  return failed == 0 ? 0 : 1;
}
