#include "impsep/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "graph_util.hpp"

namespace impsep {

namespace {

constexpr double kProbTolerance = 1e-9;

struct SwitchGraph {
  std::vector<StateCode> codes;  // reachable states, BFS order
  std::unordered_map<StateCode, int> index;
  // edges[u] = (symbol, v)
  std::vector<std::vector<std::pair<Symbol, int>>> edges;
};

SwitchGraph reachable_graph(const MarkovModel& model) {
  SwitchGraph g;
  g.codes.push_back(model.initial_code());
  g.index.emplace(model.initial_code(), 0);
  for (std::size_t head = 0; head < g.codes.size(); ++head) {
    const StateCode code = g.codes[head];
    g.edges.emplace_back();
    const auto& row = model.row(code);
    for (Symbol a = 0; a < model.alpha(); ++a) {
      if (row[a] <= 0.0) continue;
      const StateCode nxt = model.advance(code, a);
      auto [it, inserted] = g.index.emplace(nxt, static_cast<int>(g.codes.size()));
      if (inserted) g.codes.push_back(nxt);
      g.edges[head].emplace_back(a, it->second);
    }
  }
  return g;
}

// Bell numbers with saturation at UINT64_MAX.
std::vector<std::uint64_t> bell_numbers(std::size_t up_to) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  auto sat_add = [](std::uint64_t a, std::uint64_t b) {
    return a > kMax - b ? kMax : a + b;
  };
  std::vector<std::uint64_t> bell(up_to + 1, 1);
  std::vector<std::uint64_t> row{1};
  for (std::size_t n = 1; n <= up_to; ++n) {
    std::vector<std::uint64_t> next;
    next.reserve(row.size() + 1);
    next.push_back(row.back());
    for (std::uint64_t v : row) next.push_back(sat_add(next.back(), v));
    row = std::move(next);
    bell[n] = row.front();
  }
  return bell;
}

void set_partitions_rec(const std::vector<Symbol>& items, std::size_t i,
                        std::vector<std::vector<Symbol>>& blocks,
                        std::vector<std::vector<std::vector<Symbol>>>& out) {
  if (i == items.size()) {
    out.push_back(blocks);
    return;
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b].push_back(items[i]);
    set_partitions_rec(items, i + 1, blocks, out);
    blocks[b].pop_back();
  }
  blocks.push_back({items[i]});
  set_partitions_rec(items, i + 1, blocks, out);
  blocks.pop_back();
}

std::vector<std::vector<std::vector<Symbol>>> set_partitions(const std::vector<Symbol>& items) {
  std::vector<std::vector<std::vector<Symbol>>> out;
  std::vector<std::vector<Symbol>> blocks;
  set_partitions_rec(items, 0, blocks, out);
  return out;
}

}  // namespace

bool dominates(const MarkovModel& switch_model, Symbol a, Symbol b) {
  if (a >= switch_model.alpha() || b >= switch_model.alpha()) {
    throw UnknownLabelError("domination query label out of range");
  }
  if (a == b) return false;
  const SwitchGraph g = reachable_graph(switch_model);
  const std::size_t n = g.codes.size();
  std::vector<std::vector<int>> residual(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& [sym, v] : g.edges[u]) {
      if (sym != a) residual[u].push_back(v);
    }
  }
  const detail::SccResult scc = detail::strongly_connected_components(residual);
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& [sym, v] : g.edges[u]) {
      if (sym == b && sym != a &&
          scc.comp[u] == scc.comp[static_cast<std::size_t>(v)]) {
        return false;  // a cycle avoiding a's emits b, so b-runs are unbounded
      }
    }
  }
  return true;
}

DominationReport domination_report(const MarkovModel& switch_model) {
  const std::size_t n = switch_model.alpha();
  DominationReport report;
  report.label_count = n;
  report.dominates.assign(n, std::vector<bool>(n, false));
  for (Symbol a = 0; a < n; ++a) {
    for (Symbol b = 0; b < n; ++b) {
      if (a != b) report.dominates[a][b] = dominates(switch_model, a, b);
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (report.dominates[a][b] && report.dominates[b][a]) {
        report.mutual_pairs.emplace_back(a, b);
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    bool total = true;
    for (std::size_t b = 0; b < n && total; ++b) {
      if (b != a) total = report.dominates[a][b];
    }
    if (total) report.totally_dominant.push_back(a);
  }

  std::vector<char> assigned(n, 0);
  std::size_t remaining = n;
  while (remaining > 0) {
    std::vector<std::size_t> layer;
    for (std::size_t a = 0; a < n; ++a) {
      if (assigned[a]) continue;
      bool ready = true;
      for (std::size_t b = 0; b < n && ready; ++b) {
        if (report.dominates[a][b] && !assigned[b]) ready = false;
      }
      if (ready) layer.push_back(a);
    }
    if (layer.empty()) {
      report.layers.clear();
      report.has_layers = false;
      return report;
    }
    for (std::size_t a : layer) assigned[a] = 1;
    remaining -= layer.size();
    report.layers.push_back(std::move(layer));
  }
  report.has_layers = true;
  return report;
}

ImpModel split_memoryless(const ImpModel& model, std::size_t block_index,
                          const std::vector<std::vector<Symbol>>& parts) {
  const Partition& part = model.partition();
  if (block_index >= part.block_count()) throw ValidationError("block index out of range");
  const MarkovModel& comp = model.component(block_index);
  if (!comp.memoryless()) {
    throw NotMemorylessError("only a memoryless block can be split");
  }
  if (parts.empty()) throw ValidationError("need at least one part");

  const std::vector<Symbol>& block = part.block(block_index);
  std::vector<Symbol> covered;
  for (const auto& p : parts) {
    if (p.empty()) throw ValidationError("parts must be nonempty");
    for (Symbol s : p) {
      if (part.block_of(s) != block_index) {
        throw ValidationError("part symbol outside the split block");
      }
      covered.push_back(s);
    }
  }
  std::sort(covered.begin(), covered.end());
  if (covered != block) {
    throw ValidationError("parts must partition the block exactly");
  }

  const auto& base_row = comp.row(0);
  std::vector<double> part_mass(parts.size(), 0.0);
  for (std::size_t j = 0; j < parts.size(); ++j) {
    for (Symbol s : parts[j]) part_mass[j] += base_row[part.local_of(s)];
    if (part_mass[j] <= 0.0) {
      throw ZeroMassPartError("part " + std::to_string(j) + " has zero probability mass");
    }
  }

  std::vector<std::vector<Symbol>> new_blocks;
  for (std::size_t i = 0; i < part.block_count(); ++i) {
    if (i != block_index) new_blocks.push_back(part.block(i));
  }
  for (const auto& p : parts) new_blocks.push_back(p);
  Partition new_part(part.alphabet_size(), std::move(new_blocks));
  const std::size_t new_m = new_part.block_count();

  // Old block index behind each new block; part mass for the split ones.
  std::vector<std::size_t> old_of_new(new_m);
  std::vector<double> mass_of_new(new_m, 1.0);
  for (std::size_t j = 0; j < new_m; ++j) {
    old_of_new[j] = part.block_of(new_part.block(j).front());
  }
  std::vector<Symbol> part_labels;  // new labels of the parts, ascending
  for (std::size_t jp = 0; jp < parts.size(); ++jp) {
    const std::size_t nj = new_part.block_of(parts[jp].front());
    mass_of_new[nj] = part_mass[jp];
    part_labels.push_back(static_cast<Symbol>(nj));
  }
  std::sort(part_labels.begin(), part_labels.end());
  std::vector<Symbol> new_of_old(part.block_count(), 0);
  for (std::size_t j = 0; j < new_m; ++j) {
    if (old_of_new[j] != block_index) new_of_old[old_of_new[j]] = static_cast<Symbol>(j);
  }

  const MarkovModel& sw = model.switch_model();
  std::map<std::vector<Symbol>, std::vector<double>> new_rows;
  std::vector<std::vector<Symbol>> preimages;
  for (StateCode code : sw.states()) {
    const std::vector<Symbol> old_tuple = sw.decode_state(code);
    const auto& old_row = sw.row(code);
    std::vector<double> new_row(new_m, 0.0);
    for (std::size_t j = 0; j < new_m; ++j) {
      const double base = old_row[static_cast<Symbol>(old_of_new[j])];
      new_row[j] = old_of_new[j] == block_index ? base * mass_of_new[j] : base;
    }
    // Every refinement of the old tuple gets the same row.
    preimages.assign(1, std::vector<Symbol>{});
    for (Symbol old_label : old_tuple) {
      std::vector<std::vector<Symbol>> grown;
      if (old_label == block_index) {
        grown.reserve(preimages.size() * part_labels.size());
        for (const auto& prefix : preimages) {
          for (Symbol pl : part_labels) {
            grown.push_back(prefix);
            grown.back().push_back(pl);
          }
        }
      } else {
        grown.reserve(preimages.size());
        for (const auto& prefix : preimages) {
          grown.push_back(prefix);
          grown.back().push_back(new_of_old[old_label]);
        }
      }
      preimages = std::move(grown);
    }
    for (auto& tuple : preimages) new_rows.emplace(std::move(tuple), new_row);
  }

  std::vector<Symbol> new_initial;
  for (Symbol old_label : sw.initial_state()) {
    new_initial.push_back(old_label == block_index ? part_labels.front()
                                                   : new_of_old[old_label]);
  }
  MarkovModel new_switch(switch_alphabet(new_m), sw.order(), std::move(new_rows),
                         std::move(new_initial));

  std::vector<MarkovModel> new_components;
  new_components.reserve(new_m);
  for (std::size_t j = 0; j < new_m; ++j) {
    if (old_of_new[j] != block_index) {
      new_components.push_back(model.component(old_of_new[j]));
      continue;
    }
    const auto& symbols = new_part.block(j);
    std::vector<std::string> labels;
    std::vector<double> row;
    labels.reserve(symbols.size());
    row.reserve(symbols.size());
    for (Symbol s : symbols) {
      labels.push_back(model.alphabet().label(s));
      row.push_back(base_row[part.local_of(s)] / mass_of_new[j]);
    }
    std::map<std::vector<Symbol>, std::vector<double>> rows;
    rows.emplace(std::vector<Symbol>{}, std::move(row));
    new_components.emplace_back(Alphabet(std::move(labels)), 0, std::move(rows),
                                std::vector<Symbol>{});
  }

  return ImpModel(model.alphabet(), std::move(new_part), std::move(new_components),
                  std::move(new_switch));
}

std::optional<ImpModel> try_merge(const ImpModel& model, std::size_t block_a,
                                  std::size_t block_b) {
  const Partition& part = model.partition();
  if (block_a >= part.block_count() || block_b >= part.block_count() || block_a == block_b) {
    throw ValidationError("merge needs two distinct blocks");
  }
  if (!model.component(block_a).memoryless() || !model.component(block_b).memoryless()) {
    throw NotMemorylessError("only memoryless blocks can be merged");
  }

  std::vector<std::vector<Symbol>> new_blocks;
  for (std::size_t i = 0; i < part.block_count(); ++i) {
    if (i != block_a && i != block_b) new_blocks.push_back(part.block(i));
  }
  std::vector<Symbol> merged_symbols = part.block(block_a);
  merged_symbols.insert(merged_symbols.end(), part.block(block_b).begin(),
                        part.block(block_b).end());
  new_blocks.push_back(std::move(merged_symbols));
  Partition new_part(part.alphabet_size(), std::move(new_blocks));
  const std::size_t new_m = new_part.block_count();

  std::vector<Symbol> new_of_old(part.block_count());
  for (std::size_t i = 0; i < part.block_count(); ++i) {
    new_of_old[i] = static_cast<Symbol>(new_part.block_of(part.block(i).front()));
  }

  const MarkovModel& sw = model.switch_model();
  const auto sa = static_cast<Symbol>(block_a);
  const auto sb = static_cast<Symbol>(block_b);

  // One conditional ratio across every state, and zero only together.
  double gamma = -1.0;
  for (StateCode code : sw.states()) {
    const double pa = sw.prob(code, sa);
    const double pb = sw.prob(code, sb);
    if ((pa == 0.0) != (pb == 0.0)) return std::nullopt;
    if (pa > 0.0) {
      const double r = pb / pa;
      if (gamma < 0.0) {
        gamma = r;
      } else if (std::fabs(r - gamma) > kProbTolerance * std::max(gamma, r)) {
        return std::nullopt;
      }
    }
  }
  if (gamma <= 0.0) return std::nullopt;

  // Group old states by their merged image; all conditionals must agree on
  // each group, otherwise the merged switch on image states is ill defined.
  auto image = [&](StateCode code) {
    std::vector<Symbol> t = sw.decode_state(code);
    for (Symbol& x : t) x = new_of_old[x];
    return t;
  };
  std::map<std::vector<Symbol>, std::vector<StateCode>> fibers;
  for (StateCode code : sw.states()) fibers[image(code)].push_back(code);
  for (const auto& [img, members] : fibers) {
    (void)img;
    const auto& rep_row = sw.row(members.front());
    for (std::size_t k = 1; k < members.size(); ++k) {
      const auto& other = sw.row(members[k]);
      for (Symbol c = 0; c < sw.alpha(); ++c) {
        if (std::fabs(other[c] - rep_row[c]) > kProbTolerance) return std::nullopt;
      }
    }
  }

  std::map<std::vector<Symbol>, std::vector<double>> new_rows;
  for (const auto& [img, members] : fibers) {
    const auto& rep_row = sw.row(members.front());
    std::vector<double> row(new_m, 0.0);
    for (Symbol c = 0; c < sw.alpha(); ++c) row[new_of_old[c]] += rep_row[c];
    new_rows.emplace(img, std::move(row));
  }
  MarkovModel new_switch(switch_alphabet(new_m), sw.order(), std::move(new_rows),
                         image(sw.initial_code()));

  const double weight_a = 1.0 / (1.0 + gamma);
  const double weight_b = gamma / (1.0 + gamma);
  const std::size_t merged_index = new_of_old[block_a];
  std::vector<MarkovModel> new_components;
  new_components.reserve(new_m);
  for (std::size_t j = 0; j < new_m; ++j) {
    if (j != merged_index) {
      new_components.push_back(model.component(part.block_of(new_part.block(j).front())));
      continue;
    }
    const auto& symbols = new_part.block(j);
    std::vector<std::string> labels;
    std::vector<double> row;
    for (Symbol s : symbols) {
      labels.push_back(model.alphabet().label(s));
      const bool from_a = part.block_of(s) == block_a;
      const auto& base = from_a ? model.component(block_a).row(0)
                                : model.component(block_b).row(0);
      row.push_back((from_a ? weight_a : weight_b) * base[part.local_of(s)]);
    }
    std::map<std::vector<Symbol>, std::vector<double>> rows;
    rows.emplace(std::vector<Symbol>{}, std::move(row));
    new_components.emplace_back(Alphabet(std::move(labels)), 0, std::move(rows),
                                std::vector<Symbol>{});
  }

  return ImpModel(model.alphabet(), std::move(new_part), std::move(new_components),
                  std::move(new_switch));
}

ImpModel canonicalize(const ImpModel& model) {
  ImpModel current = model;
  bool merged_any = true;
  while (merged_any) {
    merged_any = false;
    const std::size_t m = current.block_count();
    for (std::size_t a = 0; a < m && !merged_any; ++a) {
      if (!current.component(a).memoryless()) continue;
      for (std::size_t b = a + 1; b < m && !merged_any; ++b) {
        if (!current.component(b).memoryless()) continue;
        if (auto merged = try_merge(current, a, b)) {
          current = std::move(*merged);
          merged_any = true;
        }
      }
    }
  }
  return current;
}

std::vector<Partition> enumerate_compatible_partitions(const ImpModel& model,
                                                       std::size_t max_results) {
  const DominationReport report = domination_report(model.switch_model());
  for (const auto& row : report.dominates) {
    for (bool d : row) {
      if (d) {
        throw DominationPresentError(
            "compatible partitions are only characterized without domination");
      }
    }
  }

  const ImpModel canon = canonicalize(model);
  const Partition& cpart = canon.partition();

  std::size_t largest = 1;
  for (std::size_t i = 0; i < cpart.block_count(); ++i) {
    largest = std::max(largest, cpart.block(i).size());
  }
  const std::vector<std::uint64_t> bell = bell_numbers(largest);
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < cpart.block_count(); ++i) {
    const std::uint64_t ways =
        canon.component(i).memoryless() ? bell[cpart.block(i).size()] : 1;
    if (ways != 0 && total > std::numeric_limits<std::uint64_t>::max() / ways) {
      throw SearchSpaceTooLargeError("too many compatible partitions");
    }
    total *= ways;
    if (total > max_results) {
      throw SearchSpaceTooLargeError("more than " + std::to_string(max_results) +
                                     " compatible partitions");
    }
  }

  std::vector<std::vector<std::vector<std::vector<Symbol>>>> choices;
  for (std::size_t i = 0; i < cpart.block_count(); ++i) {
    if (canon.component(i).memoryless() && cpart.block(i).size() > 1) {
      choices.push_back(set_partitions(cpart.block(i)));
    } else {
      choices.push_back({{cpart.block(i)}});
    }
  }

  std::vector<Partition> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<std::size_t> idx(choices.size(), 0);
  while (true) {
    std::vector<std::vector<Symbol>> blocks;
    for (std::size_t i = 0; i < choices.size(); ++i) {
      for (const auto& sub : choices[i][idx[i]]) blocks.push_back(sub);
    }
    out.emplace_back(cpart.alphabet_size(), std::move(blocks));
    std::size_t pos = 0;
    while (pos < choices.size()) {
      if (++idx[pos] < choices[pos].size()) break;
      idx[pos] = 0;
      ++pos;
    }
    if (pos == choices.size()) break;
  }
  return out;
}

double fsm_divergence(const FsmSource& p, const FsmSource& q) {
  if (!p.same_structure(q)) {
    throw StructureMismatchError("sources do not share state set and transitions");
  }
  const std::vector<double> pi = p.stationary();
  double total = 0.0;
  for (std::size_t s = 0; s < p.state_count(); ++s) {
    if (pi[s] <= 0.0) continue;
    for (std::size_t a = 0; a < p.alpha; ++a) {
      const double pp = p.emission[s * p.alpha + a];
      if (pp <= 0.0) continue;
      const double qq = q.emission[s * q.alpha + a];
      if (qq <= 0.0) return std::numeric_limits<double>::infinity();
      total += pi[s] * pp * std::log2(pp / qq);
    }
  }
  return total < 0.0 ? 0.0 : total;
}

double fsm_divergence(const ImpModel& p, const ImpModel& q) {
  const FsmSource base = build_fsm(p);
  const FsmSource other = build_fsm_like(base, p, q);
  return fsm_divergence(base, other);
}

}  // namespace impsep
