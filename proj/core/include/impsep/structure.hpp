#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "impsep/imp.hpp"

namespace impsep {

// Label a dominates label b when, along strings of positive probability,
// runs of b's between occurrences of a's are bounded. Equivalently: remove
// every a-emitting edge from the reachable positive-probability state graph;
// a dominates b iff no remaining cycle can emit b.
bool dominates(const MarkovModel& switch_model, Symbol a, Symbol b);

struct DominationReport {
  std::size_t label_count = 0;
  // dominates[a][b], irreflexive.
  std::vector<std::vector<bool>> dominates;
  // Mutually dominating pairs (a, b), a < b.
  std::vector<std::pair<std::size_t, std::size_t>> mutual_pairs;
  // Labels dominating every other label (every label, when there is one).
  std::vector<std::size_t> totally_dominant;
  // Layer l holds the labels whose dominated set is contained in layers
  // below l; layer 0 holds the labels that dominate nothing. The layer
  // decomposition exists only when no mutual domination is present.
  bool has_layers = false;
  std::vector<std::vector<std::size_t>> layers;
};

DominationReport domination_report(const MarkovModel& switch_model);

// Replaces memoryless block `block_index` by the given parts (sets of global
// symbols). Part j's component emits b with probability P(b) / P(part j);
// the switch is refined so the whole model keeps the exact distribution of
// the original. Throws NotMemorylessError for a block with memory and
// ZeroMassPartError when a part has no probability mass.
ImpModel split_memoryless(const ImpModel& model, std::size_t block_index,
                          const std::vector<std::vector<Symbol>>& parts);

// Inverse of split_memoryless for two memoryless blocks: succeeds when the
// switch probabilities of the two blocks keep a single ratio across all
// states mapping to a common merged state and all other conditionals agree
// on those fibers. Returns the merged model, or nullopt when the blocks are
// not mergeable. Throws NotMemorylessError when either block has memory.
std::optional<ImpModel> try_merge(const ImpModel& model, std::size_t block_a,
                                  std::size_t block_b);

// Greedily merges memoryless block pairs (lowest pair first) until no pair
// merges. The result is a fixed point of try_merge over memoryless pairs.
ImpModel canonicalize(const ImpModel& model);

// All partitions obtained from the canonical one by splitting each
// memoryless block into an arbitrary set partition of its symbols. Defined
// only for switches without domination; throws DominationPresentError
// otherwise. Stops with SearchSpaceTooLargeError past max_results.
std::vector<Partition> enumerate_compatible_partitions(const ImpModel& model,
                                                       std::size_t max_results = 1u << 20);

// Average per-symbol divergence sum_s pi_p(s) sum_a p(a|s) log2(p/q) between
// two sources sharing state set and transition structure. Positive emission
// in p where q has none gives +infinity.
double fsm_divergence(const FsmSource& p, const FsmSource& q);
double fsm_divergence(const ImpModel& p, const ImpModel& q);

}  // namespace impsep
