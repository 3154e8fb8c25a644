#include <doctest.h>

#include <cmath>

#include "impsep/cost.hpp"
#include "impsep/search.hpp"
#include "support/builders.hpp"

using namespace impsep;
using testing::seq_of;

TEST_CASE("single-block cost of a two-symbol sequence, by hand") {
  Alphabet ab = Alphabet::from_chars("ab");
  const Sequence seq = seq_of(ab, "ab");
  OrderVector orders;
  orders.components = {0};
  orders.switch_order = 0;
  const CostBreakdown c = cost(seq, 2, Partition::single_block(2), orders, 0.5);
  CHECK(c.entropy_bits == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c.kappa == 1);
  CHECK(c.penalty_bits == doctest::Approx(0.5 * std::log2(3.0)).epsilon(1e-12));
  CHECK(c.total_bits == doctest::Approx(2.0 + 0.5 * std::log2(3.0)).epsilon(1e-12));
  CHECK(c.beta == 0.5);
}

TEST_CASE("the penalty term matches the closed form at the reference configuration") {
  const ImpModel model = testing::small_random_imp(77, {4, 5, 6}, {1, 1, 1}, 0);
  Rng rng(78);
  const Sequence seq = interleave_sample(model, 1000, rng);
  OrderVector orders;
  orders.components = {1, 1, 1};
  orders.switch_order = 0;
  const CostBreakdown c = cost(seq, 15, model.partition(), orders, 0.5);
  CHECK(c.kappa == 64);
  CHECK(c.penalty_bits == doctest::Approx(0.5 * 64.0 * std::log2(1001.0)).epsilon(1e-12));
  CHECK(c.penalty_bits == doctest::Approx(318.95124).epsilon(1e-6));
  CHECK(c.total_bits == doctest::Approx(c.entropy_bits + c.penalty_bits).epsilon(1e-12));
}

TEST_CASE("cost decomposes into stream entropies at the given orders") {
  const ImpModel model = testing::two_block_imp();
  Rng rng(79);
  const Sequence seq = interleave_sample(model, 600, rng);
  OrderVector orders;
  orders.components = {1, 1};
  orders.switch_order = 0;
  const CostBreakdown c = cost(seq, 4, model.partition(), orders, 0.5);
  const double by_hand =
      empirical_entropy(project_local(seq, model.partition(), 0), 1, 2) +
      empirical_entropy(project_local(seq, model.partition(), 1), 1, 2) +
      empirical_entropy(switch_sequence(seq, model.partition()), 0, 2);
  CHECK(c.entropy_bits == doctest::Approx(by_hand).epsilon(1e-9));
  CHECK(c.kappa == count_imp_params(model.partition(), orders));
}

TEST_CASE("order selection is independent per stream and uses the full length") {
  const ImpModel model = testing::two_block_imp();
  Rng rng(80);
  const Sequence seq = interleave_sample(model, 2000, rng);
  const Partition& partition = model.partition();
  const OrderVector picked = best_orders(seq, 4, partition, 0.5, 3);
  const double log_n1 = std::log2(static_cast<double>(seq.size()) + 1.0);
  for (std::size_t i = 0; i < 2; ++i) {
    const Sequence stream = project_local(seq, partition, i);
    const std::size_t a = partition.block(i).size();
    const OrderChoice want = choose_order(stream, a, 0.5, 3, log_n1, [&](int k) {
      return checked_pow(a, static_cast<unsigned>(k)) * (a - 1);
    });
    CHECK(picked.components[i] == want.order);
  }
  const Sequence labels = switch_sequence(seq, partition);
  const OrderChoice sw = choose_order(labels, 2, 0.5, 3, log_n1, [&](int k) {
    return checked_pow(2, static_cast<unsigned>(k)) * 1;
  });
  CHECK(picked.switch_order == sw.order);
}

TEST_CASE("singleton blocks take order zero without search") {
  Alphabet abc = Alphabet::from_chars("abc");
  Rng rng(81);
  Sequence seq;
  for (int t = 0; t < 500; ++t) seq.push_back(static_cast<Symbol>(rng.next_below(3)));
  const Partition partition(3, {{0}, {1}, {2}});
  const OrderVector picked = best_orders(seq, 3, partition, 0.5, 3);
  CHECK(picked.components == std::vector<int>{0, 0, 0});
}

TEST_CASE("cached evaluation equals from-scratch evaluation bit for bit") {
  const ImpModel model = testing::small_random_imp(82, {2, 2, 2}, {1, 1, 1}, 0);
  Rng rng(83);
  const Sequence seq = interleave_sample(model, 1500, rng);
  CostEvaluator evaluator(seq, 6, 0.5, 3);
  for (const Partition& p : neighborhood(model.partition(), 1)) {
    const CostBreakdown cached = evaluator.evaluate(p);
    const CostBreakdown fresh = evaluator.evaluate_scratch(p);
    CHECK(cached.total_bits == fresh.total_bits);
    CHECK(cached.entropy_bits == fresh.entropy_bits);
    CHECK(cached.kappa == fresh.kappa);
    CHECK(cached.orders.components == fresh.orders.components);
    CHECK(cached.orders.switch_order == fresh.orders.switch_order);
  }
  CHECK(evaluator.cached_partitions() > 0);
  evaluator.clear();
  CHECK(evaluator.cached_partitions() == 0);
}

TEST_CASE("total cost is bit-identical under symbol relabeling") {
  const ImpModel model = testing::small_random_imp(84, {3, 2}, {1, 0}, 0);
  Rng rng(85);
  const Sequence seq = interleave_sample(model, 800, rng);

  // Reverse the symbol ids and carry the partition along.
  const std::size_t alpha = 5;
  Sequence relabeled;
  for (Symbol s : seq) relabeled.push_back(static_cast<Symbol>(alpha - 1 - s));
  std::vector<std::vector<Symbol>> mapped_blocks;
  for (const auto& block : model.partition().blocks()) {
    std::vector<Symbol> b;
    for (Symbol s : block) b.push_back(static_cast<Symbol>(alpha - 1 - s));
    mapped_blocks.push_back(b);
  }
  const Partition mapped(alpha, mapped_blocks);

  CostEvaluator eval_a(seq, alpha, 0.5, 3);
  CostEvaluator eval_b(relabeled, alpha, 0.5, 3);
  const CostBreakdown ca = eval_a.evaluate(model.partition());
  const CostBreakdown cb = eval_b.evaluate(mapped);
  CHECK(ca.total_bits == cb.total_bits);
  CHECK(ca.entropy_bits == cb.entropy_bits);
  CHECK(ca.kappa == cb.kappa);
}

TEST_CASE("evaluator fields mirror the standalone cost routine") {
  const ImpModel model = testing::two_block_imp();
  Rng rng(86);
  const Sequence seq = interleave_sample(model, 400, rng);
  CostEvaluator evaluator(seq, 4, 0.5, 3);
  const CostBreakdown via_eval = evaluator.evaluate(model.partition());
  const OrderVector orders = best_orders(seq, 4, model.partition(), 0.5, 3);
  const CostBreakdown via_cost = cost(seq, 4, model.partition(), orders, 0.5);
  CHECK(via_eval.total_bits == doctest::Approx(via_cost.total_bits).epsilon(1e-9));
  CHECK(via_eval.kappa == via_cost.kappa);
  CHECK(evaluator.alpha() == 4);
  CHECK(evaluator.beta() == 0.5);
  CHECK(evaluator.k_cap() == 3);
}
