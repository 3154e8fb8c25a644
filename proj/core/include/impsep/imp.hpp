#pragma once

#include <cstdint>
#include <vector>

#include "impsep/markov.hpp"
#include "impsep/partition.hpp"

namespace impsep {

struct OrderVector {
  std::vector<int> components;
  int switch_order = 0;
};

// Alphabet used for switch processes built in-core: one decimal label per
// block index. The serialized form uses the same labels, so block identity
// survives round trips even after blocks are renamed by canonicalization.
Alphabet switch_alphabet(std::size_t block_count);

enum class StartMode { fixed, stationary };

// Interleaved Markov process: a switch process over block indices picks, at
// each time step, which component emits the next symbol; unselected
// components keep their state. Component i is a Markov source over the
// labels of block i's symbols, in canonical order; the switch is a Markov
// source over the block indices.
class ImpModel {
 public:
  ImpModel(Alphabet alphabet, Partition partition, std::vector<MarkovModel> components,
           MarkovModel switch_model);

  const Alphabet& alphabet() const { return alphabet_; }
  const Partition& partition() const { return partition_; }
  std::size_t block_count() const { return partition_.block_count(); }
  const MarkovModel& component(std::size_t i) const { return components_.at(i); }
  const std::vector<MarkovModel>& components() const { return components_; }
  const MarkovModel& switch_model() const { return switch_; }
  OrderVector orders() const;

  // Strict dynamic checks on every sub-model; loaders and generators call
  // this, the constructor does not.
  void validate_ergodic() const;

 private:
  Alphabet alphabet_;
  Partition partition_;
  std::vector<MarkovModel> components_;
  MarkovModel switch_;
};

// Subsequence of seq over the symbols of one block (global symbol ids).
Sequence project(const Sequence& seq, const Partition& partition, std::size_t block);
// Same subsequence re-indexed to the block's local alphabet 0..|block|-1.
Sequence project_local(const Sequence& seq, const Partition& partition, std::size_t block);
// Block index of each symbol of seq, as a sequence over 0..m-1.
Sequence switch_sequence(const Sequence& seq, const Partition& partition);

// Emits `length` symbols. Per step: one inverse-CDF draw for the switch,
// then one for the selected component, in that order.
Sequence interleave_sample(const ImpModel& model, std::size_t length, Rng& rng);

// log2 P(seq) via the product decomposition: switch probability of the label
// sequence times each component's probability of its projected stream.
double log2_prob_product(const ImpModel& model, const Sequence& seq,
                         StartMode mode = StartMode::fixed);
// log2 P(seq) by walking all chains jointly, one symbol at a time. The
// stationary mode enumerates joint start states weighted by the product of
// the per-chain stationary laws.
double log2_prob_sequential(const ImpModel& model, const Sequence& seq,
                            StartMode mode = StartMode::fixed);

// Explicit finite-state source over composite states. A state is the tuple
// of all component contexts plus the switch context; emitting symbol a
// advances the switch by a's block index and that block's component by a's
// local symbol.
struct FsmSource {
  std::size_t alpha = 0;
  std::vector<std::vector<StateCode>> tuples;  // per state: m component codes, then switch
  std::vector<std::int64_t> next;              // state * alpha + a; -1 where emission is 0
  std::vector<double> emission;                // state * alpha + a
  std::size_t initial = 0;

  std::size_t state_count() const { return tuples.size(); }
  double log2_prob(const Sequence& seq) const;
  // Stationary law over states; requires a unique recurrent class.
  std::vector<double> stationary() const;
  bool same_structure(const FsmSource& other) const;
};

// States reachable from the initial tuple with positive probability, in
// BFS discovery order.
FsmSource build_fsm(const ImpModel& model);

// Evaluates q's emission probabilities on base's state tuples, keeping
// base's state indexing. Requires q to share base's partition and orders;
// throws StructureMismatchError otherwise.
FsmSource build_fsm_like(const FsmSource& base, const ImpModel& base_model, const ImpModel& q);

// Free parameters of the interleaved representation:
// sum_i |A_i|^{k_i} (|A_i| - 1) + (m - 1) m^{k_sw}.
std::uint64_t count_imp_params(const Partition& partition, const OrderVector& orders);
// Free parameters of the single finite-state source on composite states:
// (alpha - 1) m^{k_sw} prod_i |A_i|^{k_i}.
std::uint64_t count_fsm_params(const Partition& partition, const OrderVector& orders);
// Parameter-count gap between modeling one block as two separate blocks
// versus one: m (m+1)^{k_sw} - (m-1) m^{k_sw} - 1. Zero iff k_sw = 0.
std::uint64_t kappa_split_delta(std::uint64_t m, int switch_order);

}  // namespace impsep
