#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "metainv/codec.hpp"
#include "metainv/dataset.hpp"
#include "metainv/designer.hpp"
#include "metainv/error.hpp"
#include "metainv/features.hpp"
#include "metainv/surrogate.hpp"

namespace metainv::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Raised for problems that are the caller's fault but only detectable after
/// argument parsing (e.g. an unparsable --target).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes through a sibling temporary so a failure never leaves a partial file.
void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    body(out);
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw DataError("failed writing " + path.string());
    }
  }
  fs::rename(tmp, path);
}

json notch_json(const Notch& n) {
  return {{"freq_ghz", n.freq_ghz}, {"depth_db", n.depth_db}, {"bandwidth_ghz", n.bandwidth_ghz}};
}

json target_json(const DesignTarget& t) {
  json a = json::array();
  for (const auto& n : t.notches) a.push_back(notch_json(n));
  return a;
}

json codes_json(const UnitCellCodes& c) {
  json a = json::array();
  for (auto v : c.codes()) a.push_back(static_cast<int>(v));
  return a;
}

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

void write_mask(const fs::path& path, const PixelMask& mask) {
  const auto ext = path.extension().string();
  write_file(path, [&](std::ostream& o) {
    if (ext == ".csv") {
      write_mask_csv(mask, o);
    } else {
      write_pbm(mask, o);
    }
  });
}

void print_notches(std::ostream& out, const DesignTarget& t) {
  if (t.notches.empty()) {
    out << "  (no notches below -10 dB)\n";
    return;
  }
  for (const auto& n : t.notches) {
    out << fmt::format("  {:7.2f} GHz  {:8.2f} dB  bw {:6.3f} GHz\n", n.freq_ghz, n.depth_db, n.bandwidth_ghz);
  }
}

// --- subcommands -----------------------------------------------------------

struct GenDataArgs {
  std::size_t n = 2000;
  std::uint64_t seed = 0;
  std::string out;
  bool canonical = true;
  bool store_spectra = false;
};

int gen_data(const GenDataArgs& a, std::ostream& out) {
  const Dataset d = generate(a.n, a.seed, SurrogateConfig{}, a.canonical, a.store_spectra);
  write_file(a.out, [&](std::ostream& o) { save_dataset(d, o); });
  out << fmt::format("wrote {} samples to {} (seed {}, canonical {}, digest {})\n", d.size(), a.out, a.seed,
                     a.canonical ? "on" : "off", dataset_digest(d));
  return kExitOk;
}

struct TrainArgs {
  std::string data;
  std::string variant;
  std::size_t epochs = 3000;
  std::size_t batch = 30;
  double lr = 1e-3;
  double dropout = 0.1;
  double train_fraction = 0.7;
  std::uint64_t seed = 42;
  std::string out;
  std::string history;
  std::size_t log_every = 100;
};

int train_cmd(const TrainArgs& a, std::ostream& out) {
  const Variant variant = variant_from_string(a.variant);
  const SurrogateConfig cfg;
  const Dataset data = load_dataset(fs::path(a.data), cfg);
  auto [train_set, test_set] = split(data, a.train_fraction, a.seed);

  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch;
  tc.learning_rate = a.lr;
  tc.rng_seed = a.seed;
  tc.dropout_rate = a.dropout;
  try {
    tc.validate(train_set.size());
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }

  out << fmt::format("training {} model on {} samples ({} held out), {} epochs\n", to_string(variant),
                     train_set.size(), test_set.size(), tc.epochs);
  auto log = [&](std::size_t epoch, const EpochRecord& r) {
    if (a.log_every != 0 && (epoch % a.log_every == 0 || epoch == 1 || epoch == tc.epochs)) {
      out << fmt::format("epoch {:5d}  loss {:.6f}  acc {:.4f}  test loss {:.6f}  test acc {:.4f}\n", epoch,
                         r.train.loss, r.train.accuracy, r.validation->loss, r.validation->accuracy)
          << std::flush;
    }
  };
  const InverseTraining trained = train_inverse(variant, train_set, test_set, tc, log);
  const Metrics metrics = evaluate(trained.model, variant, test_set, cfg);

  ModelManifest manifest;
  manifest.variant = variant;
  manifest.dataset_digest = dataset_digest(data);
  manifest.surrogate_config_digest = cfg.digest();
  manifest.train_config = tc;
  manifest.train_fraction = a.train_fraction;
  manifest.split_seed = a.seed;
  manifest.final_metrics = metrics;
  manifest.final_train_loss = trained.history.empty() ? 0.0 : trained.history.back().train.loss;

  fs::path weights_tmp = a.out;
  weights_tmp += ".partial";
  save_bundle(trained.model, manifest, weights_tmp);
  fs::rename(weights_tmp, a.out);
  fs::rename(manifest_path(weights_tmp), manifest_path(a.out));

  if (!a.history.empty()) {
    write_file(a.history, [&](std::ostream& o) {
      o << "epoch,train_loss,train_accuracy,test_loss,test_accuracy\n";
      for (std::size_t e = 0; e < trained.history.size(); ++e) {
        const auto& r = trained.history[e];
        o << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g}\n", e + 1, r.train.loss, r.train.accuracy,
                         r.validation->loss, r.validation->accuracy);
      }
    });
  }
  out << fmt::format("held-out bit accuracy {:.4f}, tile accuracy {:.4f}, notch-count match {:.3f}\n",
                     metrics.bit_accuracy, metrics.tile_accuracy, metrics.count_match_rate);
  out << fmt::format("wrote {} and {}\n", a.out, manifest_path(a.out).string());
  return kExitOk;
}

struct DesignArgs {
  std::string model;
  std::string target;
  std::string out_mask;
  std::string out_spectrum;
  std::string out_plot;
  std::string report;
};

int design_cmd(const DesignArgs& a, std::ostream& out) {
  DesignTarget target;
  try {
    target = parse_target(a.target);
  } catch (const InvalidInput& e) {
    throw UsageError(fmt::format("--target: {}", e.what()));
  }
  const auto [model, manifest] = load_bundle(a.model);
  const DesignReport r = design(model, manifest.variant, target);

  if (!a.out_mask.empty()) write_mask(a.out_mask, r.mask);
  if (!a.out_spectrum.empty()) write_file(a.out_spectrum, [&](std::ostream& o) { write_spectrum_csv(r.spectrum, o); });
  if (!a.out_plot.empty()) {
    write_file(a.out_plot, [&](std::ostream& o) { write_spectrum_svg(r.spectrum, o, "target " + format_target(target)); });
  }
  if (!a.report.empty()) {
    json errors = json::array();
    for (const auto& e : r.match.matched) {
      errors.push_back({{"target_index", e.target_index},
                        {"achieved_index", e.achieved_index},
                        {"dfreq_ghz", e.dfreq_ghz},
                        {"ddepth_db", e.ddepth_db},
                        {"dbw_ghz", e.dbw_ghz}});
    }
    const json j = {{"variant", to_string(manifest.variant)},
                    {"target", target_json(r.target)},
                    {"codes", codes_json(r.codes)},
                    {"achieved", target_json(r.achieved)},
                    {"matched", errors},
                    {"missed", r.match.missed},
                    {"spurious", r.match.spurious}};
    write_file(a.report, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  }

  out << "target:\n";
  print_notches(out, r.target);
  out << "tile codes (1-based): ";
  for (int t = 0; t < kTileCount; ++t) out << (t ? " " : "") << r.codes[static_cast<std::size_t>(t)] + 1;
  out << "\nachieved:\n";
  print_notches(out, r.achieved);
  out << fmt::format("matched {}, missed {}, spurious {}\n", r.match.matched.size(), r.match.missed,
                     r.match.spurious);
  for (const auto& e : r.match.matched) {
    out << fmt::format("  target {} -> dfreq {:+.3f} GHz  ddepth {:+.2f} dB  dbw {:+.3f} GHz\n", e.target_index,
                       e.dfreq_ghz, e.ddepth_db, e.dbw_ghz);
  }
  return kExitOk;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string report;
  bool holdout = false;
};

int eval_cmd(const EvalArgs& a, std::ostream& out) {
  const auto [model, manifest] = load_bundle(a.model);
  Dataset data = load_dataset(fs::path(a.data));
  if (a.holdout) data = split(data, manifest.train_fraction, manifest.split_seed).second;
  const Metrics m = evaluate(model, manifest.variant, data);
  if (!a.report.empty()) {
    const json j = {{"variant", to_string(manifest.variant)},
                    {"dataset_digest", dataset_digest(data)},
                    {"holdout", a.holdout},
                    {"metrics", metrics_json(m)}};
    write_file(a.report, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  }
  out << fmt::format(
      "{} samples: bit accuracy {:.4f}, tile accuracy {:.4f}, notch-count match {:.3f}, "
      "mean |dfreq| {:.4f} GHz, |ddepth| {:.3f} dB, |dbw| {:.4f} GHz\n",
      m.samples, m.bit_accuracy, m.tile_accuracy, m.count_match_rate, m.mean_abs_dfreq_ghz, m.mean_abs_ddepth_db,
      m.mean_abs_dbw_ghz);
  return kExitOk;
}

struct SimulateArgs {
  std::string codes;
  std::string out;
  std::string plot;
};

int simulate_cmd(const SimulateArgs& a, std::ostream& out) {
  UnitCellCodes cell;
  try {
    cell = parse_codes(a.codes);
  } catch (const InvalidInput& e) {
    throw UsageError(fmt::format("--codes: {}", e.what()));
  }
  const Spectrum s = simulate(cell);
  if (!a.out.empty()) write_file(a.out, [&](std::ostream& o) { write_spectrum_csv(s, o); });
  if (!a.plot.empty()) write_file(a.plot, [&](std::ostream& o) { write_spectrum_svg(s, o, format_codes(cell)); });
  out << "codes: " << format_codes(cell) << "\nnotches:\n";
  print_notches(out, extract_notches(s));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inverse metasurface design with dense neural networks and an analytic surrogate", "metainv"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a labeled dataset through the surrogate");
  gen_cmd->add_option("--n", gen.n, "Number of samples")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->required();
  gen_cmd->add_option("--out", gen.out, "Output MSDS/1 file")->required();
  gen_cmd->add_flag("--canonical,!--no-canonical", gen.canonical, "Store sorted labels (default on)");
  gen_cmd->add_flag("--store-spectra", gen.store_spectra, "Keep each sample's spectrum in the file");

  TrainArgs tr;
  auto* train_sub = app.add_subcommand("train", "Train an inverse network");
  train_sub->add_option("--data", tr.data, "MSDS/1 dataset")->required();
  train_sub->add_option("--variant", tr.variant, "restricted | non_restricted")
      ->required()
      ->check(CLI::IsMember({"restricted", "non_restricted", "non-restricted"}));
  train_sub->add_option("--epochs", tr.epochs, "Epoch budget")->check(CLI::PositiveNumber);
  train_sub->add_option("--batch", tr.batch, "Mini-batch size")->check(CLI::PositiveNumber);
  train_sub->add_option("--lr", tr.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  train_sub->add_option("--dropout", tr.dropout, "Dropout rate")->check(CLI::Range(0.0, 0.999));
  train_sub->add_option("--train-fraction", tr.train_fraction, "Training share of the dataset")
      ->check(CLI::Range(0.001, 0.999));
  train_sub->add_option("--seed", tr.seed, "Seed for split, initialization, shuffling and dropout");
  train_sub->add_option("--out", tr.out, "Output weights file (manifest written alongside)")->required();
  train_sub->add_option("--history", tr.history, "Optional per-epoch CSV");
  train_sub->add_option("--log-every", tr.log_every, "Progress line interval in epochs (0 = quiet)");

  DesignArgs de;
  auto* design_sub = app.add_subcommand("design", "Design a unit cell for a notch target");
  design_sub->add_option("--model", de.model, "Weights file of a trained bundle")->required();
  design_sub->add_option("--target", de.target, "\"freq,depth,bw;...\" in GHz, dB, GHz")->required();
  design_sub->add_option("--out-mask", de.out_mask, "Mask output (.pbm or .csv)");
  design_sub->add_option("--out-spectrum", de.out_spectrum, "Achieved spectrum CSV");
  design_sub->add_option("--out-plot", de.out_plot, "Achieved spectrum SVG");
  design_sub->add_option("--report", de.report, "JSON design report");

  EvalArgs ev;
  auto* eval_sub = app.add_subcommand("eval", "Evaluate a trained bundle on a dataset");
  eval_sub->add_option("--model", ev.model, "Weights file of a trained bundle")->required();
  eval_sub->add_option("--data", ev.data, "MSDS/1 dataset")->required();
  eval_sub->add_option("--report", ev.report, "JSON metrics report");
  eval_sub->add_flag("--holdout", ev.holdout, "Only score the held-out partition recorded in the manifest");

  SimulateArgs si;
  auto* sim_sub = app.add_subcommand("simulate", "Surrogate spectrum of a unit cell");
  sim_sub->add_option("--codes", si.codes, "16 tile codes 0..7, row-major")->required();
  sim_sub->add_option("--out", si.out, "Spectrum CSV");
  sim_sub->add_option("--plot", si.plot, "Spectrum SVG");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return gen_data(gen, out);
    if (train_sub->parsed()) return train_cmd(tr, out);
    if (design_sub->parsed()) return design_cmd(de, out);
    if (eval_sub->parsed()) return eval_cmd(ev, out);
    if (sim_sub->parsed()) return simulate_cmd(si, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace metainv::cli
