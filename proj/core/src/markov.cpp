#include "impsep/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "graph_util.hpp"

namespace impsep {

namespace {

constexpr double kRowSumTolerance = 1e-9;
// Dense count storage while alpha^(order+1) stays below this.
constexpr std::uint64_t kDenseCells = std::uint64_t{1} << 22;

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
  while (b != 0) {
    std::uint64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

std::uint64_t checked_pow(std::uint64_t base, unsigned exp) {
  std::uint64_t result = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (base != 0 && result > std::numeric_limits<std::uint64_t>::max() / base) {
      throw ValidationError("integer power overflows 64 bits");
    }
    result *= base;
  }
  return result;
}

MarkovModel::MarkovModel(Alphabet alphabet, int order,
                         std::map<std::vector<Symbol>, std::vector<double>> transitions,
                         std::vector<Symbol> initial_state)
    : alphabet_(std::move(alphabet)), order_(order), initial_state_(std::move(initial_state)) {
  if (alphabet_.size() == 0) throw ValidationError("model alphabet must be nonempty");
  if (order_ < 0 || order_ > 32) throw ValidationError("order must be in [0, 32]");
  num_contexts_ = checked_pow(alpha(), static_cast<unsigned>(order_));
  if (transitions.empty()) throw ValidationError("model needs at least one context row");
  if (initial_state_.size() != static_cast<std::size_t>(order_)) {
    throw ValidationError("initial state length must equal the order");
  }
  rows_.reserve(transitions.size());
  state_codes_.reserve(transitions.size());
  for (auto& [state, row] : transitions) {
    const StateCode code = encode_state(state);
    auto context_text = [&] {
      std::string text;
      for (Symbol s : state) {
        if (!text.empty()) text += ',';
        text += alphabet_.label(s);
      }
      return "\"" + text + "\"";
    };
    if (row.size() != alpha()) {
      throw ValidationError("row for context " + context_text() +
                            " must have one entry per alphabet symbol");
    }
    double sum = 0.0;
    for (double p : row) {
      if (!std::isfinite(p) || p < 0.0) {
        throw ValidationError("row for context " + context_text() +
                              " has a negative or non-finite probability");
      }
      sum += p;
    }
    if (std::fabs(sum - 1.0) > kRowSumTolerance) {
      throw ValidationError("row for context " + context_text() +
                            " does not sum to one (deviation " + std::to_string(sum - 1.0) + ")");
    }
    std::vector<double> normalized = std::move(row);
    for (double& p : normalized) p /= sum;
    rows_.emplace(code, std::move(normalized));
    state_codes_.push_back(code);
  }
  std::sort(state_codes_.begin(), state_codes_.end());
  initial_code_ = encode_state(initial_state_);
  if (!has_state(initial_code_)) throw ValidationError("initial state has no transition row");
  for (StateCode code : state_codes_) {
    const auto& r = rows_.at(code);
    for (Symbol a = 0; a < alpha(); ++a) {
      if (r[a] > 0.0 && !has_state(advance(code, a))) {
        throw ValidationError("context reachable with positive probability has no row");
      }
    }
  }
}

const std::vector<double>& MarkovModel::row(StateCode code) const {
  auto it = rows_.find(code);
  if (it == rows_.end()) throw ValidationError("no transition row for the requested context");
  return it->second;
}

std::vector<Symbol> MarkovModel::decode_state(StateCode code) const {
  std::vector<Symbol> out(static_cast<std::size_t>(order_));
  for (int i = order_ - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<Symbol>(code % alpha());
    code /= alpha();
  }
  return out;
}

StateCode MarkovModel::encode_state(const std::vector<Symbol>& state) const {
  if (state.size() != static_cast<std::size_t>(order_)) {
    throw ValidationError("context length must equal the order");
  }
  StateCode code = 0;
  for (Symbol s : state) {
    if (s >= alpha()) throw UnknownSymbolError("context symbol out of range");
    code = code * alpha() + s;
  }
  return code;
}

void MarkovModel::validate_ergodic() const {
  const std::size_t n = state_codes_.size();
  std::unordered_map<StateCode, int> index;
  index.reserve(n);
  for (std::size_t i = 0; i < n; ++i) index.emplace(state_codes_[i], static_cast<int>(i));

  std::vector<std::vector<int>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows_.at(state_codes_[i]);
    for (Symbol a = 0; a < alpha(); ++a) {
      if (r[a] > 0.0) adj[i].push_back(index.at(advance(state_codes_[i], a)));
    }
  }

  std::vector<std::int64_t> level(n, -1);
  std::vector<int> queue;
  const int start = index.at(initial_code_);
  level[static_cast<std::size_t>(start)] = 0;
  queue.push_back(start);
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const auto u = static_cast<std::size_t>(queue[qi]);
    for (int v : adj[u]) {
      if (level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[u] + 1;
        queue.push_back(v);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (level[i] < 0) {
      throw NonErgodicError("state " + std::to_string(state_codes_[i]) +
                            " is unreachable from the initial state");
    }
  }

  const detail::SccResult scc = detail::strongly_connected_components(adj);
  if (scc.count != 1) {
    throw NonErgodicError("transition graph is not strongly connected");
  }

  std::uint64_t period = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (int v : adj[u]) {
      const std::int64_t d = level[u] + 1 - level[static_cast<std::size_t>(v)];
      period = gcd_u64(period, static_cast<std::uint64_t>(d < 0 ? -d : d));
    }
  }
  if (period != 1) {
    throw NonErgodicError("transition graph is periodic (period " + std::to_string(period) + ")");
  }

  for (Symbol a = 0; a < alpha(); ++a) {
    bool emitted = false;
    for (std::size_t i = 0; i < n && !emitted; ++i) {
      emitted = rows_.at(state_codes_[i])[a] > 0.0;
    }
    if (!emitted) {
      throw ValidationError("symbol " + alphabet_.label(a) + " is never emitted");
    }
  }
}

double MarkovModel::log2_prob_from(StateCode start, const Sequence& seq) const {
  double total = 0.0;
  StateCode code = start;
  for (Symbol s : seq) {
    if (s >= alpha()) throw UnknownSymbolError("sequence symbol out of range");
    const double p = prob(code, s);
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    total += std::log2(p);
    code = advance(code, s);
  }
  return total;
}

double MarkovModel::log2_prob_stationary(const Sequence& seq) const {
  const std::vector<double> pi = stationary_distribution(*this);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(state_codes_.size());
  for (std::size_t i = 0; i < state_codes_.size(); ++i) {
    if (pi[i] <= 0.0) continue;
    const double t = std::log2(pi[i]) + log2_prob_from(state_codes_[i], seq);
    if (t > -std::numeric_limits<double>::infinity()) {
      terms.push_back(t);
      best = std::max(best, t);
    }
  }
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double t : terms) acc += std::exp2(t - best);
  return best + std::log2(acc);
}

CountTable::CountTable(int order, std::size_t alpha) : order_(order), alpha_(alpha) {
  if (alpha_ == 0) throw ValidationError("counts need a nonempty alphabet");
  if (order_ < 0 || order_ > 32) throw ValidationError("order must be in [0, 32]");
  num_contexts_ = checked_pow(alpha_, static_cast<unsigned>(order_));
  dense_ = num_contexts_ <= kDenseCells / alpha_;
  if (dense_) dense_counts_.assign(static_cast<std::size_t>(num_contexts_ * alpha_), 0);
}

void CountTable::add(StateCode context, Symbol a) {
  if (a >= alpha_) throw UnknownSymbolError("counted symbol out of range");
  if (context >= num_contexts_) throw ValidationError("context code out of range");
  if (dense_) {
    ++dense_counts_[static_cast<std::size_t>(context * alpha_ + a)];
  } else {
    auto& row = sparse_counts_[context];
    if (row.empty()) row.assign(alpha_, 0);
    ++row[a];
  }
  ++total_;
}

std::uint64_t CountTable::count(StateCode context, Symbol a) const {
  if (a >= alpha_ || context >= num_contexts_) return 0;
  if (dense_) return dense_counts_[static_cast<std::size_t>(context * alpha_ + a)];
  auto it = sparse_counts_.find(context);
  return it == sparse_counts_.end() ? 0 : it->second[a];
}

std::uint64_t CountTable::context_total(StateCode context) const {
  std::uint64_t sum = 0;
  for (Symbol a = 0; a < alpha_; ++a) sum += count(context, a);
  return sum;
}

std::vector<StateCode> CountTable::contexts() const {
  std::vector<StateCode> out;
  if (dense_) {
    for (StateCode c = 0; c < num_contexts_; ++c) {
      const auto base = static_cast<std::size_t>(c * alpha_);
      for (std::size_t a = 0; a < alpha_; ++a) {
        if (dense_counts_[base + a] != 0) {
          out.push_back(c);
          break;
        }
      }
    }
  } else {
    out.reserve(sparse_counts_.size());
    for (const auto& [c, row] : sparse_counts_) {
      (void)row;
      out.push_back(c);
    }
    std::sort(out.begin(), out.end());
  }
  return out;
}

void EntropyHistogram::add_row(const std::uint32_t* row, std::size_t width) {
  // Coefficient per count value v: +1 for the row total, -1 for each
  // individual count equal to v.
  std::uint64_t total = 0;
  for (std::size_t a = 0; a < width; ++a) {
    const std::uint32_t c = row[a];
    if (c != 0) {
      total += c;
      hist_[c] -= 1;
    }
  }
  if (total != 0) hist_[total] += 1;
}

double EntropyHistogram::bits() const {
  std::vector<std::pair<std::uint64_t, std::int64_t>> terms;
  terms.reserve(hist_.size());
  for (const auto& [v, coeff] : hist_) {
    if (coeff != 0 && v > 1) terms.emplace_back(v, coeff);
  }
  std::sort(terms.begin(), terms.end());
  double bits = 0.0;
  for (const auto& [v, coeff] : terms) {
    const double dv = static_cast<double>(v);
    bits += static_cast<double>(coeff) * dv * std::log2(dv);
  }
  return bits < 0.0 ? 0.0 : bits;
}

double CountTable::entropy_bits() const {
  EntropyHistogram hist;
  if (dense_) {
    for (StateCode c = 0; c < num_contexts_; ++c) {
      hist.add_row(&dense_counts_[static_cast<std::size_t>(c * alpha_)], alpha_);
    }
  } else {
    for (const auto& [c, row] : sparse_counts_) {
      (void)c;
      hist.add_row(row.data(), alpha_);
    }
  }
  return hist.bits();
}

CountTable count_transitions(const Sequence& seq, int order, std::size_t alpha) {
  CountTable table(order, alpha);
  const auto k = static_cast<std::size_t>(order);
  if (seq.size() <= k) return table;
  const std::uint64_t num_contexts = checked_pow(alpha, static_cast<unsigned>(order));
  StateCode code = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (seq[i] >= alpha) throw UnknownSymbolError("sequence symbol out of range");
    code = code * alpha + seq[i];
  }
  for (std::size_t i = k; i < seq.size(); ++i) {
    const Symbol a = seq[i];
    table.add(code, a);
    code = order == 0 ? 0 : (code * alpha + a) % num_contexts;
  }
  return table;
}

double empirical_entropy(const Sequence& seq, int order, std::size_t alpha) {
  return count_transitions(seq, order, alpha).entropy_bits();
}

int estimate_order(const Sequence& seq, std::size_t alpha, double beta, int max_order) {
  const double log_n1 = std::log2(static_cast<double>(seq.size()) + 1.0);
  const OrderChoice c = choose_order(seq, alpha, beta, max_order, log_n1, [&](int k) {
    // alpha^k * (alpha - 1), written as a difference so overflow is caught.
    return checked_pow(alpha, static_cast<unsigned>(k) + 1) -
           checked_pow(alpha, static_cast<unsigned>(k));
  });
  return c.order;
}

std::vector<double> stationary_distribution(const MarkovModel& model) {
  const auto& codes = model.states();
  const std::size_t n = codes.size();
  std::unordered_map<StateCode, int> index;
  index.reserve(n);
  for (std::size_t i = 0; i < n; ++i) index.emplace(codes[i], static_cast<int>(i));
  detail::TransitionTriplets t;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = model.row(codes[i]);
    for (Symbol a = 0; a < model.alpha(); ++a) {
      if (row[a] > 0.0) {
        t.from.push_back(static_cast<int>(i));
        t.to.push_back(index.at(model.advance(codes[i], a)));
        t.prob.push_back(row[a]);
      }
    }
  }
  return detail::stationary_from_triplets(n, t);
}

Symbol draw_symbol(const std::vector<double>& row, Rng& rng) {
  const double u = rng.next_double();
  double cum = 0.0;
  int chosen = -1;
  int last_positive = -1;
  for (std::size_t a = 0; a < row.size(); ++a) {
    const double p = row[a];
    if (p <= 0.0) continue;
    last_positive = static_cast<int>(a);
    cum += p;
    if (u < cum) {
      chosen = static_cast<int>(a);
      break;
    }
  }
  if (chosen < 0) chosen = last_positive;
  if (chosen < 0) throw ValidationError("probability row has no positive entry");
  return static_cast<Symbol>(chosen);
}

Sequence sample(const MarkovModel& model, std::size_t length, Rng& rng) {
  Sequence out;
  out.reserve(length);
  StateCode code = model.initial_code();
  for (std::size_t i = 0; i < length; ++i) {
    const Symbol a = draw_symbol(model.row(code), rng);
    out.push_back(a);
    code = model.advance(code, a);
  }
  return out;
}

}  // namespace impsep
