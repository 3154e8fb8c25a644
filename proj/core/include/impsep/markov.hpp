#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "impsep/alphabet.hpp"
#include "impsep/errors.hpp"
#include "impsep/rng.hpp"

namespace impsep {

// A length-k context packed in base alpha; contexts and states are the same
// thing for these models.
using StateCode = std::uint64_t;

// base^exp with overflow detection.
std::uint64_t checked_pow(std::uint64_t base, unsigned exp);

// Finite-memory (order-k) Markov source over a finite alphabet. States are
// the listed contexts; rows are conditional emission distributions. The
// constructor checks structural consistency (row arity, nonnegative finite
// entries, row sums within 1e-9 of one, transition closure over the listed
// states) and renormalizes rows exactly. Stricter dynamic checks live in
// validate_ergodic(), which loaders call; keeping them out of the
// constructor allows building e.g. periodic chains for analysis.
class MarkovModel {
 public:
  MarkovModel(Alphabet alphabet, int order,
              std::map<std::vector<Symbol>, std::vector<double>> transitions,
              std::vector<Symbol> initial_state);

  const Alphabet& alphabet() const { return alphabet_; }
  int order() const { return order_; }
  std::size_t alpha() const { return alphabet_.size(); }
  bool memoryless() const { return order_ == 0; }

  const std::vector<StateCode>& states() const { return state_codes_; }
  bool has_state(StateCode code) const { return rows_.find(code) != rows_.end(); }
  const std::vector<double>& row(StateCode code) const;
  double prob(StateCode context, Symbol a) const { return row(context)[a]; }

  StateCode initial_code() const { return initial_code_; }
  const std::vector<Symbol>& initial_state() const { return initial_state_; }

  // Context update: append a, drop the oldest symbol.
  StateCode advance(StateCode context, Symbol a) const {
    if (order_ == 0) return 0;
    return (context * alpha() + a) % num_contexts_;
  }
  std::vector<Symbol> decode_state(StateCode code) const;
  StateCode encode_state(const std::vector<Symbol>& state) const;

  // Strict checks applied when a model enters from outside: every stored
  // state reachable from the initial state, the reachable graph strongly
  // connected and aperiodic, every alphabet symbol emitted somewhere.
  void validate_ergodic() const;

  double log2_prob(const Sequence& seq) const { return log2_prob_from(initial_code_, seq); }
  double log2_prob_from(StateCode start, const Sequence& seq) const;
  // Start state drawn from the stationary law instead of the fixed one.
  double log2_prob_stationary(const Sequence& seq) const;

 private:
  Alphabet alphabet_;
  int order_ = 0;
  std::uint64_t num_contexts_ = 1;
  std::vector<Symbol> initial_state_;
  StateCode initial_code_ = 0;
  std::vector<StateCode> state_codes_;
  std::unordered_map<StateCode, std::vector<double>> rows_;
};

// Accumulates count rows and evaluates sum_{c,a} n(c,a) log2(n(c)/n(c,a))
// through a histogram of count values summed in ascending order. Any two
// routes that feed the same multiset of rows get bit-identical results,
// independent of row order or symbol labels.
class EntropyHistogram {
 public:
  void add_row(const std::uint32_t* row, std::size_t width);
  double bits() const;

 private:
  std::unordered_map<std::uint64_t, std::int64_t> hist_;
};

// Transition counts of one sequence at a fixed context length. Dense storage
// when alpha^(order+1) is small, hashed rows otherwise; both paths produce
// bit-identical entropy values for identical count multisets.
class CountTable {
 public:
  CountTable(int order, std::size_t alpha);

  int order() const { return order_; }
  std::size_t alpha() const { return alpha_; }
  std::uint64_t total() const { return total_; }

  void add(StateCode context, Symbol a);
  std::uint64_t count(StateCode context, Symbol a) const;
  std::uint64_t context_total(StateCode context) const;
  std::vector<StateCode> contexts() const;  // ascending, only nonzero totals

  // Empirical entropy in bits: sum over contexts c and symbols a of
  // n(c,a) * log2(n(c) / n(c,a)). Computed from a histogram of count values
  // summed in ascending order, so the result is bit-identical under any
  // relabeling of contexts or symbols.
  double entropy_bits() const;

 private:
  int order_;
  std::size_t alpha_;
  std::uint64_t num_contexts_;
  bool dense_;
  std::vector<std::uint32_t> dense_counts_;
  std::unordered_map<StateCode, std::vector<std::uint32_t>> sparse_counts_;
  std::uint64_t total_ = 0;
};

// Counts of seq at context length `order`; the first min(order, |seq|)
// symbols seed the context and are not counted.
CountTable count_transitions(const Sequence& seq, int order, std::size_t alpha);

double empirical_entropy(const Sequence& seq, int order, std::size_t alpha);

struct OrderChoice {
  int order = 0;
  double entropy_bits = 0.0;
  std::uint64_t kappa = 0;
  double penalized_bits = 0.0;
};

// Minimizes entropy_bits(k) + beta * kappa(k) * log_n1 over k in
// [0, max_order]; ties go to the smaller k. log_n1 is the caller's penalty
// log factor, which for multi-stream costs comes from the full interleaved
// length rather than the stream length.
template <class KappaFn>
OrderChoice choose_order(const Sequence& seq, std::size_t alpha, double beta, int max_order,
                         double log_n1, KappaFn&& kappa) {
  OrderChoice best;
  bool have = false;
  for (int k = 0; k <= max_order; ++k) {
    OrderChoice c;
    c.order = k;
    c.entropy_bits = empirical_entropy(seq, k, alpha);
    c.kappa = kappa(k);
    c.penalized_bits = c.entropy_bits + beta * static_cast<double>(c.kappa) * log_n1;
    if (!have || c.penalized_bits < best.penalized_bits) {
      best = c;
      have = true;
    }
  }
  return best;
}

// Penalized order estimate for a single sequence with per-sequence parameter
// count alpha^k * (alpha - 1) and log factor log2(|seq| + 1).
int estimate_order(const Sequence& seq, std::size_t alpha, double beta, int max_order);

// Stationary law over model.states(), same index order. Requires a unique
// recurrent class among the stored states; throws NonErgodicError otherwise.
// Uses a dense linear solve for small state sets and damped power iteration
// above that.
std::vector<double> stationary_distribution(const MarkovModel& model);

// One inverse-CDF draw from a probability row, consuming one uniform and
// walking the row in canonical symbol order.
Symbol draw_symbol(const std::vector<double>& row, Rng& rng);

// Emits `length` symbols starting from the model's initial state. One
// inverse-CDF draw per emitted symbol, in canonical symbol order.
Sequence sample(const MarkovModel& model, std::size_t length, Rng& rng);

}  // namespace impsep
