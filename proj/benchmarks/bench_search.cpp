#include <benchmark/benchmark.h>

#include "impsep/harness.hpp"
#include "impsep/search.hpp"

namespace {

void bm_heuristic_small(benchmark::State& state) {
  impsep::ExperimentConfig config;
  config.block_sizes = {2, 2, 2};
  config.orders = {{1, 1, 1}, 0};
  impsep::Rng rng(11);
  const impsep::ImpModel model = impsep::random_imp(config, rng);
  const impsep::Sequence seq =
      impsep::interleave_sample(model, static_cast<std::size_t>(state.range(0)), rng);
  impsep::SearchParams params;
  params.seed = 3;
  for (auto _ : state) {
    impsep::CostEvaluator evaluator(seq, 6, 0.5, params.k_cap);
    benchmark::DoNotOptimize(impsep::deinterleave_heuristic(evaluator, params));
  }
}

}  // namespace

BENCHMARK(bm_heuristic_small)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
