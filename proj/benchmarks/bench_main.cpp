#include <vector>

#include <benchmark/benchmark.h>

#include "exldr/data.hpp"
#include "exldr/expander.hpp"
#include "exldr/pipeline.hpp"
#include "exldr/sketch.hpp"

namespace {

using namespace exldr;

Dataset make_data(std::size_t n) {
  SynthConfig cfg;
  cfg.n = n;
  return gen_synthetic(cfg);
}

void BM_SampleExpander(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_expander(n, 1000, 2, RngLabel{seed++, 0, 0}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleExpander)->Arg(5000)->Arg(10000)->Arg(20000);

void BM_SketchAndStats(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset data = make_data(n);
  std::vector<ExpanderSketch> graphs;
  for (std::size_t t = 0; t < 8; ++t) graphs.push_back(sample_expander(n, 1000, 2, {0, 1, t}));
  for (auto _ : state) {
    const BucketAssignment assignment = assign_buckets(data.X, data.y, graphs);
    std::size_t total = 0;
    for (const auto& key : assignment.non_empty()) {
      total += bucket_moments(data.X, data.y, assignment, key.repetition, key.bucket).count;
    }
    benchmark::DoNotOptimize(total);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SketchAndStats)->Arg(5000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_RunSeed(benchmark::State& state) {
  const Dataset data = make_data(5000);
  PipelineConfig cfg;
  cfg.filter_rounds = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_seed(data.X, data.y, cfg, 1));
}
BENCHMARK(BM_RunSeed)->Arg(0)->Arg(7)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
