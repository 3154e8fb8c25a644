#include "impsep/search.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>

#include "impsep/rng.hpp"

namespace impsep {

namespace {

// Single-symbol moves of `p`, excluding p itself; deduplicated by key.
void single_moves(const Partition& p, std::map<std::string, Partition>& seen,
                  std::vector<const Partition*>& fresh) {
  const std::size_t alpha = p.alphabet_size();
  const std::size_t m = p.block_count();
  std::vector<std::size_t> assign(alpha);
  for (std::size_t s = 0; s < alpha; ++s) assign[s] = p.block_of(static_cast<Symbol>(s));
  for (std::size_t s = 0; s < alpha; ++s) {
    const std::size_t src = assign[s];
    const bool singleton = p.block(src).size() == 1;
    for (std::size_t dst = 0; dst <= m; ++dst) {
      if (dst == src) continue;
      if (dst == m && singleton) continue;  // lone symbol to a fresh block is a no-op
      const std::size_t saved = assign[s];
      assign[s] = dst;
      Partition moved = Partition::from_assignment(assign);
      assign[s] = saved;
      auto [it, inserted] = seen.emplace(moved.key(), std::move(moved));
      if (inserted) fresh.push_back(&it->second);
    }
  }
}

std::uint64_t stirling_count(std::size_t n, int max_blocks, std::uint64_t cap) {
  // Number of partitions of n items into at most max_blocks blocks,
  // saturated at cap + 1.
  const std::size_t jmax = std::min<std::size_t>(n, static_cast<std::size_t>(max_blocks));
  std::vector<std::vector<std::uint64_t>> s(n + 1, std::vector<std::uint64_t>(jmax + 1, 0));
  s[0][0] = 1;
  const std::uint64_t lim = cap + 1;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= std::min(i, jmax); ++j) {
      std::uint64_t v = s[i - 1][j - 1];
      const std::uint64_t mult = s[i - 1][j];
      if (mult > (lim - std::min(v, lim)) / j) {
        v = lim;
      } else {
        v += static_cast<std::uint64_t>(j) * mult;
      }
      s[i][j] = std::min(v, lim);
    }
  }
  std::uint64_t total = 0;
  for (std::size_t j = 1; j <= jmax; ++j) {
    total += s[n][j];
    if (total >= lim) return lim;
  }
  return total;
}

struct Candidate {
  Partition partition;
  CostBreakdown cost;
};

void consider(std::optional<Candidate>& best, Partition p, const CostBreakdown& c) {
  if (!best || result_better(c, p, best->cost, best->partition)) {
    best = Candidate{std::move(p), c};
  }
}

}  // namespace

bool result_better(const CostBreakdown& cost_a, const Partition& a, const CostBreakdown& cost_b,
                   const Partition& b) {
  if (cost_a.total_bits != cost_b.total_bits) return cost_a.total_bits < cost_b.total_bits;
  if (a.block_count() != b.block_count()) return a.block_count() < b.block_count();
  if (a.blocks() != b.blocks()) return partition_lex_less(a, b);
  if (cost_a.orders.components != cost_b.orders.components) {
    return cost_a.orders.components < cost_b.orders.components;
  }
  return cost_a.orders.switch_order < cost_b.orders.switch_order;
}

std::vector<Partition> neighborhood(const Partition& base, int radius) {
  if (radius < 0) throw ValidationError("neighborhood radius must be nonnegative");
  std::map<std::string, Partition> seen;
  seen.emplace(base.key(), base);
  std::vector<const Partition*> frontier{&seen.begin()->second};
  for (int step = 0; step < radius; ++step) {
    std::vector<const Partition*> next;
    for (const Partition* p : frontier) single_moves(*p, seen, next);
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  std::vector<Partition> out;
  out.reserve(seen.size());
  for (auto& [key, p] : seen) {
    (void)key;
    out.push_back(std::move(p));
  }
  return out;
}

DeinterleaveResult deinterleave_exhaustive(CostEvaluator& evaluator, int max_blocks,
                                           std::uint64_t budget) {
  const std::size_t alpha = evaluator.alpha();
  if (max_blocks < 1) throw ValidationError("need at least one block");
  const std::uint64_t count = stirling_count(alpha, max_blocks, budget);
  if (count > budget) {
    throw SearchSpaceTooLargeError("partition count exceeds the budget of " +
                                   std::to_string(budget));
  }

  std::optional<Candidate> best;
  std::vector<std::size_t> assign(alpha, 0);
  // Restricted-growth enumeration with a block-count cap.
  auto rec = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (i == alpha) {
      Partition p = Partition::from_assignment(assign);
      const CostBreakdown c = evaluator.evaluate(p);
      consider(best, std::move(p), c);
      return;
    }
    const std::size_t limit = std::min(used + 1, static_cast<std::size_t>(max_blocks));
    for (std::size_t b = 0; b < limit; ++b) {
      assign[i] = b;
      self(self, i + 1, std::max(used, b + 1));
    }
  };
  rec(rec, 0, 0);
  return DeinterleaveResult{best->partition, best->cost.orders, best->cost};
}

DeinterleaveResult deinterleave_exhaustive(const Sequence& seq, std::size_t alpha, double beta,
                                           int max_blocks, int k_cap, std::uint64_t budget) {
  CostEvaluator evaluator(seq, alpha, beta, k_cap);
  return deinterleave_exhaustive(evaluator, max_blocks, budget);
}

DeinterleaveResult deinterleave_heuristic(CostEvaluator& evaluator, const SearchParams& params) {
  if (params.restarts < 1) throw ValidationError("need at least one restart");
  if (params.patience < 0 || params.descent_radius < 0 || params.perturb_radius < 0) {
    throw ValidationError("negative search parameter");
  }
  const std::size_t alpha = evaluator.alpha();

  auto descend = [&](Partition& p, CostBreakdown& c) {
    while (true) {
      std::optional<Candidate> best;
      for (Partition& nb : neighborhood(p, params.descent_radius)) {
        const CostBreakdown nc = evaluator.evaluate(nb);
        consider(best, std::move(nb), nc);
      }
      if (best && best->cost.total_bits < c.total_bits) {
        p = std::move(best->partition);
        c = best->cost;
      } else {
        return;
      }
    }
  };

  std::optional<Candidate> global;
  for (int run = 0; run < params.restarts; ++run) {
    Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(run)));

    std::vector<std::size_t> assign(alpha);
    for (std::size_t s = 0; s < alpha; ++s) {
      assign[s] = static_cast<std::size_t>(rng.next_below(alpha));
    }
    Partition current = Partition::from_assignment(assign);
    CostBreakdown current_cost = evaluator.evaluate(current);
    descend(current, current_cost);

    Partition run_best = current;
    CostBreakdown run_best_cost = current_cost;

    std::vector<Partition> around_best;
    std::string around_key;
    int stale = 0;
    while (stale < params.patience) {
      if (around_key != run_best.key()) {
        around_best = neighborhood(run_best, params.perturb_radius);
        around_key = run_best.key();
      }
      std::size_t skip = around_best.size();
      for (std::size_t i = 0; i < around_best.size(); ++i) {
        if (around_best[i] == current) {
          skip = i;
          break;
        }
      }
      const std::size_t pool = around_best.size() - (skip < around_best.size() ? 1 : 0);
      if (pool == 0) break;
      std::size_t pick = static_cast<std::size_t>(rng.next_below(pool));
      if (pick >= skip) ++pick;

      current = around_best[pick];
      current_cost = evaluator.evaluate(current);
      descend(current, current_cost);
      if (current_cost.total_bits < run_best_cost.total_bits) {
        run_best = current;
        run_best_cost = current_cost;
        stale = 0;
      } else {
        ++stale;
      }
    }
    consider(global, std::move(run_best), run_best_cost);
  }
  return DeinterleaveResult{global->partition, global->cost.orders, global->cost};
}

DeinterleaveResult deinterleave_heuristic(const Sequence& seq, std::size_t alpha, double beta,
                                          const SearchParams& params) {
  CostEvaluator evaluator(seq, alpha, beta, params.k_cap);
  return deinterleave_heuristic(evaluator, params);
}

}  // namespace impsep
