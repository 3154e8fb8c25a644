#include <benchmark/benchmark.h>

#include "impsep/harness.hpp"
#include "impsep/markov.hpp"

namespace {

impsep::Sequence make_sequence(std::size_t n) {
  impsep::ExperimentConfig config;
  config.block_sizes = {4, 5, 6};
  config.orders = {{1, 1, 1}, 0};
  impsep::Rng rng(7);
  const impsep::ImpModel model = impsep::random_imp(config, rng);
  return impsep::interleave_sample(model, n, rng);
}

void bm_count_transitions(benchmark::State& state) {
  const impsep::Sequence seq = make_sequence(static_cast<std::size_t>(state.range(0)));
  const int order = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(impsep::count_transitions(seq, order, 15));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(seq.size()));
}

void bm_empirical_entropy(benchmark::State& state) {
  const impsep::Sequence seq = make_sequence(static_cast<std::size_t>(state.range(0)));
  const int order = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(impsep::empirical_entropy(seq, order, 15));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(seq.size()));
}

}  // namespace

BENCHMARK(bm_count_transitions)->Args({10000, 1})->Args({10000, 3})->Args({100000, 3});
BENCHMARK(bm_empirical_entropy)->Args({10000, 1})->Args({10000, 3})->Args({100000, 3});

BENCHMARK_MAIN();
