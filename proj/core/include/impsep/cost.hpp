#pragma once

#include <string>
#include <unordered_map>

#include "impsep/imp.hpp"

namespace impsep {

struct CostBreakdown {
  double entropy_bits = 0.0;   // stream entropies at the chosen orders
  std::uint64_t kappa = 0;     // interleaved parameter count at those orders
  double beta = 0.0;
  double penalty_bits = 0.0;   // beta * kappa * log2(n + 1), n the full length
  double total_bits = 0.0;     // entropy_bits + penalty_bits
  OrderVector orders;
};

// Penalized description cost of seq split by `partition` at fixed orders.
// beta trades fit against model size. The asymptotic-recovery guarantee
// holds for beta > 3 (beta > 1 for the order estimator alone); the default
// 0.5 elsewhere is the empirically strongest choice at practical lengths,
// and the smallest always-safe value is open.
CostBreakdown cost(const Sequence& seq, std::size_t alpha, const Partition& partition,
                   const OrderVector& orders, double beta);

// Per-stream order selection in [0, k_cap]: each block stream and the switch
// stream independently minimize entropy plus their own penalty share; the
// penalty log factor always uses the full sequence length. Ties go to the
// smaller order.
OrderVector best_orders(const Sequence& seq, std::size_t alpha, const Partition& partition,
                        double beta, int k_cap);

// Cost evaluation with memoization. Block stream terms are cached by block
// content, so partitions sharing blocks (as search neighborhoods do) only
// pay for the switch stream; full results are cached by partition key.
// Block entropies are summed in ascending value order with the switch term
// last, which makes totals bit-identical across symbol relabelings and
// therefore makes exact cost ties meaningful.
class CostEvaluator {
 public:
  CostEvaluator(const Sequence& seq, std::size_t alpha, double beta, int k_cap);

  CostBreakdown evaluate(const Partition& partition);
  // Same value, no caches touched.
  CostBreakdown evaluate_scratch(const Partition& partition) const;

  std::size_t alpha() const { return alpha_; }
  double beta() const { return beta_; }
  int k_cap() const { return k_cap_; }
  const Sequence& sequence() const { return *seq_; }
  std::size_t cached_partitions() const { return partition_cache_.size(); }
  void clear();

 private:
  struct StreamTerm {
    int order = 0;
    double entropy_bits = 0.0;
    std::uint64_t kappa = 0;
  };

  StreamTerm block_term(const Partition& partition, std::size_t block);
  StreamTerm block_term_fresh(const Partition& partition, std::size_t block) const;
  StreamTerm switch_term(const Partition& partition) const;
  CostBreakdown assemble(const Partition& partition, const std::vector<StreamTerm>& blocks,
                         const StreamTerm& sw) const;

  const Sequence* seq_;
  std::size_t alpha_;
  double beta_;
  int k_cap_;
  double log_n1_;
  std::unordered_map<std::string, StreamTerm> block_cache_;
  std::unordered_map<std::string, CostBreakdown> partition_cache_;
};

}  // namespace impsep
