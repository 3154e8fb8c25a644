#pragma once

#include <string>

#include "impsep/search.hpp"
#include "impsep/structure.hpp"

namespace impsep {

enum class SwitchKind {
  memoryless_uniform,  // switch order 0, exactly 1/m per block
  random_order1,       // order 1, rejection-sampled for near-uniform marginals
};

enum class Method { ml_exhaustive, ml_heuristic, baseline };

const char* method_name(Method m);
Method method_from_name(const std::string& name);
const char* switch_kind_name(SwitchKind k);
SwitchKind switch_kind_from_name(const std::string& name);

struct ExperimentConfig {
  int num_sequences = 50;
  std::vector<std::size_t> lengths;
  std::vector<std::size_t> block_sizes;
  OrderVector orders;  // generating orders: one per block, plus the switch
  SwitchKind switch_kind = SwitchKind::memoryless_uniform;
  double beta = 0.5;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::ml_heuristic};
  SearchParams search;  // search.seed is ignored; per-trial seeds are derived
  int exhaustive_max_blocks = 4;
  // Calibrated on the memoryless-switch suite: small enough to catch real
  // within-block bigram deviations (order 1e-3 at these alphabet sizes) while
  // staying above cross-block sampling noise.
  double baseline_tolerance_scale = 0.08;
  int threads = 1;
  // Attempts allowed when rejection-sampling the switch of one trial.
  std::uint64_t rejection_budget = 100'000;
  // L-infinity distance from uniform allowed for the switch's stationary law.
  double switch_uniformity_tolerance = 0.02;
};

// Random generating model for one trial: consecutive blocks of the
// configured sizes, flat-random transition rows, uniformly drawn initial
// contexts. The memoryless-uniform switch is exact; the random order-1
// switch is redrawn until its stationary law is near uniform and its
// domination relation is empty.
ImpModel random_imp(const ExperimentConfig& config, Rng& rng);

struct Judgement {
  bool exact = false;      // equals the generating partition
  bool canonical = false;  // equals the canonical form of the generating model
  bool compatible = false; // lies in the generating model's compatible set
};

// When domination prevents characterizing the compatible set, `compatible`
// falls back to `canonical`.
Judgement judge(const Partition& result, const ImpModel& truth);

struct MethodOutcome {
  double exact = 0.0;
  double canonical = 0.0;
  double compatible = 0.0;
};

struct ResultRow {
  std::size_t n = 0;
  Method method = Method::ml_heuristic;
  MethodOutcome outcome;
};

struct ResultTable {
  std::vector<ResultRow> rows;  // lengths in config order, methods per length
  const MethodOutcome* find(std::size_t n, Method method) const;
  std::string csv() const;
  std::string formatted() const;
};

// Runs num_sequences independent trials: sample one interleaved sequence per
// trial from a fresh random model, deinterleave each prefix length with each
// method, judge against the generating model, and average. All randomness
// derives from config.seed per trial, so results are independent of thread
// count and identical across repeat runs.
ResultTable run_experiment(const ExperimentConfig& config);

// Pairwise-dependence baseline: symbols a, b land in one block when the
// empirical |P(ab) - P(a)P(b)| exceeds
// tolerance_scale * sqrt(ln(n + 1) / n) in either order.
Partition baseline_deinterleave(const Sequence& seq, std::size_t alpha,
                                double tolerance_scale);

struct CalibrationRow {
  double scale = 0.0;
  std::size_t n = 0;
  MethodOutcome outcome;
};

struct CalibrationResult {
  std::vector<CalibrationRow> rows;
  std::string csv() const;
};

// Success of the baseline across a grid of tolerance scales, on the same
// trials run_experiment would generate.
CalibrationResult calibrate_baseline(const ExperimentConfig& config,
                                     const std::vector<double>& scales);

}  // namespace impsep
