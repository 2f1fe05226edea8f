#include <benchmark/benchmark.h>

#include "metainv/codec.hpp"
#include "metainv/dataset.hpp"
#include "metainv/designer.hpp"
#include "metainv/features.hpp"
#include "metainv/nn.hpp"
#include "metainv/rng.hpp"
#include "metainv/surrogate.hpp"

namespace {

using namespace metainv;

UnitCellCodes random_cell(Rng& rng) {
  std::array<int, kTileCount> c{};
  for (auto& v : c) v = static_cast<int>(rng.below(kTileCodeCount));
  return UnitCellCodes(c);
}

Eigen::MatrixXd random_batch(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
  return m;
}

void BM_ForwardBackward(benchmark::State& state) {
  const Variant v = state.range(0) == 0 ? Variant::restricted : Variant::non_restricted;
  const MlpModel model = build(v);
  const auto x = random_batch(24, 30, 1);
  const auto t = random_batch(static_cast<Eigen::Index>(model.output_dim()), 30, 2);
  Rng dropout_rng(3);
  for (auto _ : state) {
    const auto cache = model.forward(x, &dropout_rng);
    benchmark::DoNotOptimize(backward(model, cache, t));
  }
  state.SetItemsProcessed(state.iterations() * 30);
  state.SetLabel(std::string(to_string(v)));
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PredictBatch(benchmark::State& state) {
  const MlpModel model = build(Variant::restricted);
  const auto x = random_batch(24, 600, 4);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict_batch(x));
  state.SetItemsProcessed(state.iterations() * 600);
}
BENCHMARK(BM_PredictBatch)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  Rng rng(5);
  const auto cell = random_cell(rng);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(cell));
}
BENCHMARK(BM_Simulate);

void BM_ExtractNotches(benchmark::State& state) {
  Rng rng(6);
  const Spectrum s = simulate(random_cell(rng));
  for (auto _ : state) benchmark::DoNotOptimize(extract_notches(s));
}
BENCHMARK(BM_ExtractNotches);

void BM_ProjectPixels(benchmark::State& state) {
  Rng rng(7);
  std::vector<double> raw(kPixelCount);
  for (auto& p : raw) p = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(project_pixels_to_tiles(raw));
}
BENCHMARK(BM_ProjectPixels);

void BM_GenerateDataset(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate(n, 42));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateDataset)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
