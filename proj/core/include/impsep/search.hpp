#pragma once

#include "impsep/cost.hpp"

namespace impsep {

struct SearchParams {
  int restarts = 5;
  int patience = 15;
  int descent_radius = 1;
  int perturb_radius = 2;
  int k_cap = 3;
  std::uint64_t seed = 0;
};

struct DeinterleaveResult {
  Partition partition;
  OrderVector orders;
  CostBreakdown cost;
};

// Everything within `radius` single-symbol moves of `base` (a move sends one
// symbol to another block or to a fresh one), base included, deduplicated,
// in a deterministic order.
std::vector<Partition> neighborhood(const Partition& base, int radius);

// Deterministic preference between evaluated partitions: lower total cost;
// on exact cost ties fewer blocks, then lexicographically smaller canonical
// block list, then lexicographically smaller orders.
bool result_better(const CostBreakdown& cost_a, const Partition& a, const CostBreakdown& cost_b,
                   const Partition& b);

// Exact minimization over every partition with at most max_blocks blocks.
// Throws SearchSpaceTooLargeError when that count exceeds `budget`.
DeinterleaveResult deinterleave_exhaustive(CostEvaluator& evaluator, int max_blocks,
                                           std::uint64_t budget = 10'000'000);
DeinterleaveResult deinterleave_exhaustive(const Sequence& seq, std::size_t alpha, double beta,
                                           int max_blocks, int k_cap,
                                           std::uint64_t budget = 10'000'000);

// Randomized restarts around steepest descent. Each restart starts from a
// uniformly random block assignment, descends over the descent-radius
// neighborhood while the cost strictly improves, then repeatedly perturbs
// the run's best partition (uniform draw from its perturb-radius
// neighborhood, excluding the current partition) and descends again, giving
// up after `patience` rounds without strict improvement. Runs are
// independent; the best endpoint across runs wins under result_better.
DeinterleaveResult deinterleave_heuristic(CostEvaluator& evaluator, const SearchParams& params);
DeinterleaveResult deinterleave_heuristic(const Sequence& seq, std::size_t alpha, double beta,
                                          const SearchParams& params);

}  // namespace impsep
