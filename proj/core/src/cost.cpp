#include "impsep/cost.hpp"

#include <algorithm>
#include <cmath>

namespace impsep {

namespace {

constexpr std::uint64_t kDenseCells = std::uint64_t{1} << 22;

// alpha^k * (alpha - 1) without silent overflow.
std::uint64_t stream_params(std::uint64_t alpha, int k) {
  return checked_pow(alpha, static_cast<unsigned>(k) + 1) -
         checked_pow(alpha, static_cast<unsigned>(k));
}

// Entropy of `stream` at every order 0..k_cap, each value bit-identical to
// empirical_entropy(stream, k, alpha). One counting pass at k_cap; lower
// orders come from marginalizing out the oldest context symbol, plus the
// few boundary transitions the longer context skipped.
std::vector<double> entropies_all_orders(const Sequence& stream, std::size_t alpha, int k_cap) {
  std::vector<double> out(static_cast<std::size_t>(k_cap) + 1, 0.0);
  std::uint64_t cells = alpha;
  bool fits = true;
  for (int i = 0; i < k_cap && fits; ++i) {
    if (cells > kDenseCells / alpha) {
      fits = false;
    } else {
      cells *= alpha;
    }
  }
  if (!fits) {
    for (int k = 0; k <= k_cap; ++k) {
      out[static_cast<std::size_t>(k)] = empirical_entropy(stream, k, alpha);
    }
    return out;
  }

  for (Symbol s : stream) {
    if (s >= alpha) throw UnknownSymbolError("stream symbol out of range");
  }
  const std::size_t n = stream.size();
  const auto kc = static_cast<std::size_t>(k_cap);
  std::uint64_t ctx_count = checked_pow(alpha, static_cast<unsigned>(k_cap));
  std::vector<std::uint32_t> cur(static_cast<std::size_t>(ctx_count * alpha), 0);
  std::size_t counted_from = std::min(n, kc);
  if (n > kc) {
    StateCode code = 0;
    for (std::size_t i = 0; i < kc; ++i) code = code * alpha + stream[i];
    for (std::size_t i = kc; i < n; ++i) {
      ++cur[static_cast<std::size_t>(code * alpha + stream[i])];
      code = k_cap == 0 ? 0 : (code * alpha + stream[i]) % ctx_count;
    }
  }

  for (int k = k_cap;; --k) {
    const std::size_t lo = std::min(n, static_cast<std::size_t>(k));
    for (std::size_t i = lo; i < counted_from; ++i) {
      StateCode code = 0;
      for (std::size_t j = i - static_cast<std::size_t>(k); j < i; ++j) {
        code = code * alpha + stream[j];
      }
      ++cur[static_cast<std::size_t>(code * alpha + stream[i])];
    }
    counted_from = lo;

    EntropyHistogram hist;
    for (std::uint64_t c = 0; c < ctx_count; ++c) {
      hist.add_row(&cur[static_cast<std::size_t>(c * alpha)], alpha);
    }
    out[static_cast<std::size_t>(k)] = hist.bits();
    if (k == 0) break;

    const std::uint64_t next_count = ctx_count / alpha;
    std::vector<std::uint32_t> nxt(static_cast<std::size_t>(next_count * alpha), 0);
    for (std::uint64_t c = 0; c < ctx_count; ++c) {
      const auto src = static_cast<std::size_t>(c * alpha);
      const auto dst = static_cast<std::size_t>((c % next_count) * alpha);
      for (std::size_t a = 0; a < alpha; ++a) nxt[dst + a] += cur[src + a];
    }
    cur = std::move(nxt);
    ctx_count = next_count;
  }
  return out;
}

std::string block_cache_key(const std::vector<Symbol>& block) {
  std::string key;
  key.reserve(block.size() * 4);
  for (Symbol s : block) {
    key.push_back(static_cast<char>(s & 0xff));
    key.push_back(static_cast<char>((s >> 8) & 0xff));
    key.push_back(static_cast<char>((s >> 16) & 0xff));
    key.push_back(static_cast<char>((s >> 24) & 0xff));
  }
  return key;
}

}  // namespace

CostEvaluator::CostEvaluator(const Sequence& seq, std::size_t alpha, double beta, int k_cap)
    : seq_(&seq), alpha_(alpha), beta_(beta), k_cap_(k_cap) {
  if (alpha_ == 0) throw ValidationError("cost evaluation needs a nonempty alphabet");
  if (k_cap_ < 0) throw ValidationError("order cap must be nonnegative");
  if (!(beta_ >= 0.0)) throw ValidationError("beta must be nonnegative");
  log_n1_ = std::log2(static_cast<double>(seq.size()) + 1.0);
}

CostEvaluator::StreamTerm CostEvaluator::block_term_fresh(const Partition& partition,
                                                          std::size_t block) const {
  const auto& symbols = partition.block(block);
  if (symbols.size() == 1) return StreamTerm{0, 0.0, 0};
  Sequence stream;
  for (Symbol s : *seq_) {
    if (partition.block_of(s) == block) stream.push_back(partition.local_of(s));
  }
  const std::vector<double> ent = entropies_all_orders(stream, symbols.size(), k_cap_);
  StreamTerm best;
  double best_pen = 0.0;
  for (int k = 0; k <= k_cap_; ++k) {
    const std::uint64_t kappa = stream_params(symbols.size(), k);
    const double pen =
        ent[static_cast<std::size_t>(k)] + beta_ * static_cast<double>(kappa) * log_n1_;
    if (k == 0 || pen < best_pen) {
      best = StreamTerm{k, ent[static_cast<std::size_t>(k)], kappa};
      best_pen = pen;
    }
  }
  return best;
}

CostEvaluator::StreamTerm CostEvaluator::block_term(const Partition& partition,
                                                    std::size_t block) {
  const std::string key = block_cache_key(partition.block(block));
  auto it = block_cache_.find(key);
  if (it != block_cache_.end()) return it->second;
  const StreamTerm term = block_term_fresh(partition, block);
  block_cache_.emplace(std::move(key), term);
  return term;
}

CostEvaluator::StreamTerm CostEvaluator::switch_term(const Partition& partition) const {
  const std::size_t m = partition.block_count();
  Sequence labels;
  labels.reserve(seq_->size());
  for (Symbol s : *seq_) labels.push_back(static_cast<Symbol>(partition.block_of(s)));
  const std::vector<double> ent = entropies_all_orders(labels, m, k_cap_);
  StreamTerm best;
  double best_pen = 0.0;
  for (int k = 0; k <= k_cap_; ++k) {
    const std::uint64_t kappa = stream_params(m, k);
    const double pen =
        ent[static_cast<std::size_t>(k)] + beta_ * static_cast<double>(kappa) * log_n1_;
    if (k == 0 || pen < best_pen) {
      best = StreamTerm{k, ent[static_cast<std::size_t>(k)], kappa};
      best_pen = pen;
    }
  }
  return best;
}

CostBreakdown CostEvaluator::assemble(const Partition& partition,
                                      const std::vector<StreamTerm>& blocks,
                                      const StreamTerm& sw) const {
  CostBreakdown out;
  out.beta = beta_;
  std::vector<double> entropies;
  entropies.reserve(blocks.size());
  std::uint64_t kappa = 0;
  out.orders.components.reserve(blocks.size());
  for (const auto& t : blocks) {
    entropies.push_back(t.entropy_bits);
    kappa += t.kappa;
    out.orders.components.push_back(t.order);
  }
  std::sort(entropies.begin(), entropies.end());
  double entropy = 0.0;
  for (double e : entropies) entropy += e;
  entropy += sw.entropy_bits;
  kappa += sw.kappa;
  out.orders.switch_order = sw.order;
  out.entropy_bits = entropy;
  out.kappa = kappa;
  out.penalty_bits = beta_ * static_cast<double>(kappa) * log_n1_;
  out.total_bits = out.entropy_bits + out.penalty_bits;
  (void)partition;
  return out;
}

CostBreakdown CostEvaluator::evaluate(const Partition& partition) {
  if (partition.alphabet_size() != alpha_) {
    throw ValidationError("partition alphabet does not match the sequence alphabet");
  }
  auto it = partition_cache_.find(partition.key());
  if (it != partition_cache_.end()) return it->second;
  std::vector<StreamTerm> blocks;
  blocks.reserve(partition.block_count());
  for (std::size_t i = 0; i < partition.block_count(); ++i) {
    blocks.push_back(block_term(partition, i));
  }
  const CostBreakdown out = assemble(partition, blocks, switch_term(partition));
  if (partition_cache_.size() >= 2'000'000) partition_cache_.clear();
  partition_cache_.emplace(partition.key(), out);
  return out;
}

CostBreakdown CostEvaluator::evaluate_scratch(const Partition& partition) const {
  if (partition.alphabet_size() != alpha_) {
    throw ValidationError("partition alphabet does not match the sequence alphabet");
  }
  std::vector<StreamTerm> blocks;
  blocks.reserve(partition.block_count());
  for (std::size_t i = 0; i < partition.block_count(); ++i) {
    blocks.push_back(block_term_fresh(partition, i));
  }
  return assemble(partition, blocks, switch_term(partition));
}

void CostEvaluator::clear() {
  block_cache_.clear();
  partition_cache_.clear();
}

CostBreakdown cost(const Sequence& seq, std::size_t alpha, const Partition& partition,
                   const OrderVector& orders, double beta) {
  if (partition.alphabet_size() != alpha) {
    throw ValidationError("partition alphabet does not match the sequence alphabet");
  }
  if (orders.components.size() != partition.block_count()) {
    throw ValidationError("order vector does not match the partition");
  }
  if (orders.switch_order < 0) throw ValidationError("negative switch order");
  const double log_n1 = std::log2(static_cast<double>(seq.size()) + 1.0);

  CostBreakdown out;
  out.beta = beta;
  out.orders = orders;
  std::vector<double> entropies;
  entropies.reserve(partition.block_count());
  for (std::size_t i = 0; i < partition.block_count(); ++i) {
    if (orders.components[i] < 0) throw ValidationError("negative component order");
    const Sequence stream = project_local(seq, partition, i);
    entropies.push_back(
        empirical_entropy(stream, orders.components[i], partition.block(i).size()));
  }
  std::sort(entropies.begin(), entropies.end());
  double entropy = 0.0;
  for (double e : entropies) entropy += e;
  entropy += empirical_entropy(switch_sequence(seq, partition), orders.switch_order,
                               partition.block_count());
  out.entropy_bits = entropy;
  out.kappa = count_imp_params(partition, orders);
  out.penalty_bits = beta * static_cast<double>(out.kappa) * log_n1;
  out.total_bits = out.entropy_bits + out.penalty_bits;
  return out;
}

OrderVector best_orders(const Sequence& seq, std::size_t alpha, const Partition& partition,
                        double beta, int k_cap) {
  CostEvaluator evaluator(seq, alpha, beta, k_cap);
  return evaluator.evaluate_scratch(partition).orders;
}

}  // namespace impsep
