#include "impsep/imp.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "graph_util.hpp"

namespace impsep {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw ValidationError("parameter count overflows 64 bits");
  }
  return a * b;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b) {
    throw ValidationError("parameter count overflows 64 bits");
  }
  return a + b;
}

// alpha^k * (alpha - 1) without silent overflow.
std::uint64_t scaled_pow(std::uint64_t alpha, int k) {
  return checked_pow(alpha, static_cast<unsigned>(k) + 1) -
         checked_pow(alpha, static_cast<unsigned>(k));
}

double walk_log2(const ImpModel& model, const Sequence& seq, std::vector<StateCode> comp_codes,
                 StateCode switch_code) {
  const Partition& p = model.partition();
  double total = 0.0;
  for (Symbol s : seq) {
    const std::size_t i = p.block_of(s);
    const Symbol local = p.local_of(s);
    const double p_sw = model.switch_model().prob(switch_code, static_cast<Symbol>(i));
    const double p_c = model.component(i).prob(comp_codes[i], local);
    if (p_sw <= 0.0 || p_c <= 0.0) return kNegInf;
    total += std::log2(p_sw) + std::log2(p_c);
    switch_code = model.switch_model().advance(switch_code, static_cast<Symbol>(i));
    comp_codes[i] = model.component(i).advance(comp_codes[i], local);
  }
  return total;
}

}  // namespace

Alphabet switch_alphabet(std::size_t block_count) {
  std::vector<std::string> labels;
  labels.reserve(block_count);
  for (std::size_t i = 0; i < block_count; ++i) labels.push_back(std::to_string(i));
  return Alphabet(std::move(labels));
}

ImpModel::ImpModel(Alphabet alphabet, Partition partition, std::vector<MarkovModel> components,
                   MarkovModel switch_model)
    : alphabet_(std::move(alphabet)),
      partition_(std::move(partition)),
      components_(std::move(components)),
      switch_(std::move(switch_model)) {
  if (partition_.alphabet_size() != alphabet_.size()) {
    throw ValidationError("partition size does not match the alphabet");
  }
  if (components_.size() != partition_.block_count()) {
    throw ValidationError("need exactly one component per block");
  }
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const auto& block = partition_.block(i);
    const Alphabet& ca = components_[i].alphabet();
    if (ca.size() != block.size()) {
      throw ValidationError("component " + std::to_string(i) +
                            " alphabet size does not match its block");
    }
    for (std::size_t j = 0; j < block.size(); ++j) {
      if (ca.label(static_cast<Symbol>(j)) != alphabet_.label(block[j])) {
        throw ValidationError("component " + std::to_string(i) +
                              " labels must be its block's labels in canonical order");
      }
    }
  }
  const Alphabet expected = switch_alphabet(partition_.block_count());
  if (!(switch_.alphabet() == expected)) {
    throw ValidationError("switch alphabet must be the decimal block indices");
  }
}

OrderVector ImpModel::orders() const {
  OrderVector v;
  v.components.reserve(components_.size());
  for (const auto& c : components_) v.components.push_back(c.order());
  v.switch_order = switch_.order();
  return v;
}

void ImpModel::validate_ergodic() const {
  for (const auto& c : components_) c.validate_ergodic();
  switch_.validate_ergodic();
}

Sequence project(const Sequence& seq, const Partition& partition, std::size_t block) {
  if (block >= partition.block_count()) throw ValidationError("block index out of range");
  Sequence out;
  for (Symbol s : seq) {
    if (partition.block_of(s) == block) out.push_back(s);
  }
  return out;
}

Sequence project_local(const Sequence& seq, const Partition& partition, std::size_t block) {
  if (block >= partition.block_count()) throw ValidationError("block index out of range");
  Sequence out;
  for (Symbol s : seq) {
    if (partition.block_of(s) == block) out.push_back(partition.local_of(s));
  }
  return out;
}

Sequence switch_sequence(const Sequence& seq, const Partition& partition) {
  Sequence out;
  out.reserve(seq.size());
  for (Symbol s : seq) out.push_back(static_cast<Symbol>(partition.block_of(s)));
  return out;
}

Sequence interleave_sample(const ImpModel& model, std::size_t length, Rng& rng) {
  const Partition& p = model.partition();
  const std::size_t m = model.block_count();
  std::vector<StateCode> comp_codes(m);
  for (std::size_t i = 0; i < m; ++i) comp_codes[i] = model.component(i).initial_code();
  StateCode sw = model.switch_model().initial_code();
  Sequence out;
  out.reserve(length);
  for (std::size_t step = 0; step < length; ++step) {
    const Symbol i = draw_symbol(model.switch_model().row(sw), rng);
    const Symbol local = draw_symbol(model.component(i).row(comp_codes[i]), rng);
    out.push_back(p.block(i)[local]);
    sw = model.switch_model().advance(sw, i);
    comp_codes[i] = model.component(i).advance(comp_codes[i], local);
  }
  return out;
}

double log2_prob_product(const ImpModel& model, const Sequence& seq, StartMode mode) {
  const Partition& p = model.partition();
  const Sequence u = switch_sequence(seq, p);
  double total = mode == StartMode::fixed ? model.switch_model().log2_prob(u)
                                          : model.switch_model().log2_prob_stationary(u);
  for (std::size_t i = 0; i < model.block_count(); ++i) {
    const Sequence stream = project_local(seq, p, i);
    total += mode == StartMode::fixed ? model.component(i).log2_prob(stream)
                                      : model.component(i).log2_prob_stationary(stream);
  }
  return total;
}

double log2_prob_sequential(const ImpModel& model, const Sequence& seq, StartMode mode) {
  const std::size_t m = model.block_count();
  if (mode == StartMode::fixed) {
    std::vector<StateCode> comp_codes(m);
    for (std::size_t i = 0; i < m; ++i) comp_codes[i] = model.component(i).initial_code();
    return walk_log2(model, seq, std::move(comp_codes), model.switch_model().initial_code());
  }

  // Joint start states weighted by the product of per-chain stationary laws.
  std::vector<std::vector<double>> pis;
  pis.reserve(m + 1);
  std::uint64_t joint = 1;
  for (std::size_t i = 0; i < m; ++i) {
    pis.push_back(stationary_distribution(model.component(i)));
    joint = checked_mul(joint, model.component(i).states().size());
  }
  pis.push_back(stationary_distribution(model.switch_model()));
  joint = checked_mul(joint, model.switch_model().states().size());
  if (joint > 1'000'000) {
    throw ValidationError("joint start enumeration too large");
  }

  std::vector<std::size_t> idx(m + 1, 0);
  std::vector<double> terms;
  double best = kNegInf;
  while (true) {
    double weight_log2 = 0.0;
    bool positive = true;
    for (std::size_t i = 0; i <= m && positive; ++i) {
      const double w = pis[i][idx[i]];
      if (w <= 0.0) {
        positive = false;
      } else {
        weight_log2 += std::log2(w);
      }
    }
    if (positive) {
      std::vector<StateCode> comp_codes(m);
      for (std::size_t i = 0; i < m; ++i) comp_codes[i] = model.component(i).states()[idx[i]];
      const StateCode sw = model.switch_model().states()[idx[m]];
      const double t = weight_log2 + walk_log2(model, seq, std::move(comp_codes), sw);
      if (t > kNegInf) {
        terms.push_back(t);
        best = std::max(best, t);
      }
    }
    std::size_t pos = 0;
    while (pos <= m) {
      const std::size_t limit =
          pos < m ? model.component(pos).states().size() : model.switch_model().states().size();
      if (++idx[pos] < limit) break;
      idx[pos] = 0;
      ++pos;
    }
    if (pos > m) break;
  }
  if (terms.empty()) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp2(t - best);
  return best + std::log2(acc);
}

double FsmSource::log2_prob(const Sequence& seq) const {
  double total = 0.0;
  std::size_t state = initial;
  for (Symbol a : seq) {
    if (a >= alpha) throw UnknownSymbolError("sequence symbol out of range");
    const std::size_t cell = state * alpha + a;
    const double p = emission[cell];
    if (p <= 0.0) return kNegInf;
    if (next[cell] < 0) {
      throw Error("positive emission with no materialized transition");
    }
    total += std::log2(p);
    state = static_cast<std::size_t>(next[cell]);
  }
  return total;
}

std::vector<double> FsmSource::stationary() const {
  detail::TransitionTriplets t;
  for (std::size_t s = 0; s < tuples.size(); ++s) {
    for (std::size_t a = 0; a < alpha; ++a) {
      const std::size_t cell = s * alpha + a;
      if (emission[cell] > 0.0 && next[cell] >= 0) {
        t.from.push_back(static_cast<int>(s));
        t.to.push_back(static_cast<int>(next[cell]));
        t.prob.push_back(emission[cell]);
      }
    }
  }
  return detail::stationary_from_triplets(tuples.size(), t);
}

bool FsmSource::same_structure(const FsmSource& other) const {
  return alpha == other.alpha && initial == other.initial && tuples == other.tuples &&
         next == other.next;
}

FsmSource build_fsm(const ImpModel& model) {
  const Partition& p = model.partition();
  const std::size_t m = model.block_count();
  const std::size_t alpha = model.alphabet().size();

  FsmSource f;
  f.alpha = alpha;
  std::map<std::vector<StateCode>, std::size_t> ids;

  std::vector<StateCode> start(m + 1);
  for (std::size_t i = 0; i < m; ++i) start[i] = model.component(i).initial_code();
  start[m] = model.switch_model().initial_code();
  ids.emplace(start, 0);
  f.tuples.push_back(start);
  f.initial = 0;

  for (std::size_t head = 0; head < f.tuples.size(); ++head) {
    const std::vector<StateCode> tuple = f.tuples[head];
    for (Symbol a = 0; a < alpha; ++a) {
      const std::size_t i = p.block_of(a);
      const Symbol local = p.local_of(a);
      const double p_sw = model.switch_model().prob(tuple[m], static_cast<Symbol>(i));
      const double p_c = model.component(i).prob(tuple[i], local);
      const double prob = p_sw * p_c;
      f.emission.push_back(prob);
      if (prob > 0.0) {
        std::vector<StateCode> nxt = tuple;
        nxt[i] = model.component(i).advance(tuple[i], local);
        nxt[m] = model.switch_model().advance(tuple[m], static_cast<Symbol>(i));
        auto [it, inserted] = ids.emplace(std::move(nxt), f.tuples.size());
        if (inserted) f.tuples.push_back(it->first);
        f.next.push_back(static_cast<std::int64_t>(it->second));
      } else {
        f.next.push_back(-1);
      }
    }
  }
  return f;
}

FsmSource build_fsm_like(const FsmSource& base, const ImpModel& base_model, const ImpModel& q) {
  if (!(q.alphabet() == base_model.alphabet())) {
    throw StructureMismatchError("models are over different alphabets");
  }
  if (q.partition() != base_model.partition()) {
    throw StructureMismatchError("models use different partitions");
  }
  const OrderVector a = base_model.orders();
  const OrderVector b = q.orders();
  if (a.components != b.components || a.switch_order != b.switch_order) {
    throw StructureMismatchError("models use different orders");
  }
  const Partition& p = q.partition();
  const std::size_t m = q.block_count();
  FsmSource f = base;
  for (std::size_t s = 0; s < base.tuples.size(); ++s) {
    const auto& tuple = base.tuples[s];
    if (!q.switch_model().has_state(tuple[m])) {
      throw StructureMismatchError("switch state missing from the second model");
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!q.component(i).has_state(tuple[i])) {
        throw StructureMismatchError("component state missing from the second model");
      }
    }
    for (Symbol sym = 0; sym < f.alpha; ++sym) {
      const std::size_t i = p.block_of(sym);
      const Symbol local = p.local_of(sym);
      f.emission[s * f.alpha + sym] = q.switch_model().prob(tuple[m], static_cast<Symbol>(i)) *
                                      q.component(i).prob(tuple[i], local);
    }
  }
  return f;
}

std::uint64_t count_imp_params(const Partition& partition, const OrderVector& orders) {
  if (orders.components.size() != partition.block_count()) {
    throw ValidationError("order vector does not match the partition");
  }
  if (orders.switch_order < 0) throw ValidationError("negative switch order");
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < partition.block_count(); ++i) {
    if (orders.components[i] < 0) throw ValidationError("negative component order");
    total = checked_add(total, scaled_pow(partition.block(i).size(), orders.components[i]));
  }
  total = checked_add(total, scaled_pow(partition.block_count(), orders.switch_order));
  return total;
}

std::uint64_t count_fsm_params(const Partition& partition, const OrderVector& orders) {
  if (orders.components.size() != partition.block_count()) {
    throw ValidationError("order vector does not match the partition");
  }
  if (orders.switch_order < 0) throw ValidationError("negative switch order");
  std::uint64_t total = partition.alphabet_size() - 1;
  total = checked_mul(total, checked_pow(partition.block_count(),
                                         static_cast<unsigned>(orders.switch_order)));
  for (std::size_t i = 0; i < partition.block_count(); ++i) {
    if (orders.components[i] < 0) throw ValidationError("negative component order");
    total = checked_mul(total, checked_pow(partition.block(i).size(),
                                           static_cast<unsigned>(orders.components[i])));
  }
  return total;
}

std::uint64_t kappa_split_delta(std::uint64_t m, int switch_order) {
  if (m == 0) throw ValidationError("block count must be positive");
  if (switch_order < 0) throw ValidationError("negative switch order");
  const auto k = static_cast<unsigned>(switch_order);
  // Switch over m+1 blocks versus switch over m blocks plus one binary
  // memoryless component (which has a single free parameter).
  const std::uint64_t split_switch = checked_mul(m, checked_pow(m + 1, k));
  const std::uint64_t merged_switch = checked_mul(m - 1, checked_pow(m, k));
  return split_switch - merged_switch - 1;
}

}  // namespace impsep
