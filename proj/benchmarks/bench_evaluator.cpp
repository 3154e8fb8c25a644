#include <benchmark/benchmark.h>

#include "impsep/cost.hpp"
#include "impsep/harness.hpp"
#include "impsep/search.hpp"

namespace {

impsep::Sequence bench_sequence(std::size_t n) {
  impsep::ExperimentConfig config;
  config.block_sizes = {4, 5, 6};
  config.orders = {{1, 1, 1}, 0};
  impsep::Rng rng(7);
  const impsep::ImpModel model = impsep::random_imp(config, rng);
  return impsep::interleave_sample(model, n, rng);
}

// One steepest-descent step: every radius-1 neighbor of the true partition,
// with block terms shared through the cache.
void bm_evaluate_cached(benchmark::State& state) {
  const impsep::Sequence seq = bench_sequence(static_cast<std::size_t>(state.range(0)));
  const impsep::Partition base(15, {{0, 1, 2, 3}, {4, 5, 6, 7, 8}, {9, 10, 11, 12, 13, 14}});
  const std::vector<impsep::Partition> moves = impsep::neighborhood(base, 1);
  for (auto _ : state) {
    impsep::CostEvaluator evaluator(seq, 15, 0.5, 3);
    double total = 0.0;
    for (const impsep::Partition& p : moves) total += evaluator.evaluate(p).total_bits;
    benchmark::DoNotOptimize(total);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(moves.size()));
}

void bm_evaluate_scratch(benchmark::State& state) {
  const impsep::Sequence seq = bench_sequence(static_cast<std::size_t>(state.range(0)));
  const impsep::Partition base(15, {{0, 1, 2, 3}, {4, 5, 6, 7, 8}, {9, 10, 11, 12, 13, 14}});
  const std::vector<impsep::Partition> moves = impsep::neighborhood(base, 1);
  const impsep::CostEvaluator evaluator(seq, 15, 0.5, 3);
  for (auto _ : state) {
    double total = 0.0;
    for (const impsep::Partition& p : moves) total += evaluator.evaluate_scratch(p).total_bits;
    benchmark::DoNotOptimize(total);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(moves.size()));
}

}  // namespace

BENCHMARK(bm_evaluate_cached)->Arg(5000)->Arg(20000);
BENCHMARK(bm_evaluate_scratch)->Arg(5000)->Arg(20000);
