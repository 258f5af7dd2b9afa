#include <benchmark/benchmark.h>

#include "stratmean/collapse.hpp"
#include "stratmean/escape.hpp"
#include "stratmean/harness.hpp"
#include "stratmean/stats.hpp"

using namespace stratmean;

namespace {

MeanContext contextFor(const std::string& name) {
  const Preset p = preset(name);
  return analyzeMean(p.space, p.measure);
}

TangentMeasure randomDelta(const TangentCone& cone, RngStream& rng) {
  TangentMeasure d;
  for (int i = 0; i < 3; ++i) d.add(cone.scaled(cone.randomUnit(rng), 0.1 + rng.uniform()), 0.1 + rng.uniform());
  return d;
}

const std::vector<std::string> kPresets{"euclidean-corners", "sphere-cluster", "spider-partly-sticky",
                                        "book-demo",         "cone-demo",      "quadrant-demo"};

} // namespace

// Empirical mean of n samples, the inner loop of every simulation trial.
static void BM_EmpiricalMean(benchmark::State& state) {
  const Preset p = preset(kPresets[static_cast<std::size_t>(state.range(0))]);
  const long n = state.range(1);
  std::uint64_t trial = 0;
  for (auto _ : state) {
    RngStream rng(1, trial++);
    const Measure emp = empiricalMeasure(sample(p.space, p.measure, rng, static_cast<std::size_t>(n)));
    benchmark::DoNotOptimize(frechetMean(p.space, emp).mean);
  }
  state.SetLabel(p.name);
}
BENCHMARK(BM_EmpiricalMean)->ArgsProduct({{0, 1, 2, 3, 4, 5}, {1600}});

static void BM_EscapeVector(benchmark::State& state) {
  const auto ctx = contextFor(kPresets[static_cast<std::size_t>(state.range(0))]);
  RngStream rng(2, 0);
  std::vector<TangentMeasure> deltas;
  for (int i = 0; i < 64; ++i) deltas.push_back(randomDelta(ctx.cone, rng));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(escapeVector(ctx, deltas[i++ % deltas.size()]).objective);
  state.SetLabel(kPresets[static_cast<std::size_t>(state.range(0))]);
}
BENCHMARK(BM_EscapeVector)->DenseRange(0, 5);

static void BM_GaussianMass(benchmark::State& state) {
  const CollapsedModel model(contextFor(kPresets[static_cast<std::size_t>(state.range(0))]));
  std::uint64_t draw = 0;
  for (auto _ : state) {
    RngStream rng(3, draw++);
    benchmark::DoNotOptimize(model.sampleGaussianMass(rng).mass.size());
  }
  state.SetLabel(kPresets[static_cast<std::size_t>(state.range(0))]);
}
BENCHMARK(BM_GaussianMass)->DenseRange(0, 5);

static void BM_EnergyTest(benchmark::State& state) {
  const CollapsedModel model(contextFor("book-demo"));
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = limitSample(model, 4, 0, n), b = limitSample(model, 5, 0, n);
  for (auto _ : state) benchmark::DoNotOptimize(energyTest(model.context().cone, a, b, 200, 1).pValue);
}
BENCHMARK(BM_EnergyTest)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_CollapseAxioms(benchmark::State& state) {
  const auto ctx = contextFor("book-demo");
  const auto map = chooseCollapse(ctx);
  for (auto _ : state) benchmark::DoNotOptimize(verifyCollapseAxioms(map, ctx).ok());
}
BENCHMARK(BM_CollapseAxioms)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
