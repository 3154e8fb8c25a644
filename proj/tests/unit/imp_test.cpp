#include <doctest.h>

#include <cmath>

#include "impsep/imp.hpp"
#include "support/builders.hpp"

using namespace impsep;
using testing::seq_of;
using testing::two_block_imp;

namespace {

// Every length-n word over the model's alphabet, recursively.
void for_all_words(std::size_t alpha, std::size_t n, Sequence& prefix, auto&& fn) {
  if (prefix.size() == n) {
    fn(prefix);
    return;
  }
  for (Symbol s = 0; s < alpha; ++s) {
    prefix.push_back(s);
    for_all_words(alpha, n, prefix, fn);
    prefix.pop_back();
  }
}

ImpModel three_symbol_imp() {
  Alphabet alphabet = Alphabet::from_chars("abc");
  Partition partition(3, {{0, 1}, {2}});
  std::vector<MarkovModel> components;
  {
    testing::Rows rows;
    rows[{0}] = {0.8, 0.2};
    rows[{1}] = {0.3, 0.7};
    components.emplace_back(Alphabet::from_chars("ab"), 1, std::move(rows),
                            std::vector<Symbol>{0});
  }
  components.push_back(testing::uniform_memoryless(Alphabet::from_chars("c")));
  testing::Rows sw;
  sw[{0}] = {0.6, 0.4};
  sw[{1}] = {0.25, 0.75};
  MarkovModel switch_model(switch_alphabet(2), 1, std::move(sw), {0});
  return ImpModel(alphabet, partition, std::move(components), std::move(switch_model));
}

}  // namespace

TEST_CASE("switch_alphabet labels blocks with decimal indices") {
  const Alphabet sw = switch_alphabet(3);
  CHECK(sw.labels() == std::vector<std::string>{"0", "1", "2"});
}

TEST_CASE("projection and switch sequence split a sequence by block") {
  const ImpModel model = two_block_imp();
  const Sequence seq = seq_of(model.alphabet(), "acbd");
  CHECK(project(seq, model.partition(), 0) == seq_of(model.alphabet(), "ab"));
  CHECK(project(seq, model.partition(), 1) == seq_of(model.alphabet(), "cd"));
  CHECK(project_local(seq, model.partition(), 0) == Sequence{0, 1});
  CHECK(project_local(seq, model.partition(), 1) == Sequence{0, 1});
  CHECK(switch_sequence(seq, model.partition()) == Sequence{0, 1, 0, 1});
  CHECK_THROWS_AS(project(seq, model.partition(), 2), ValidationError);
}

TEST_CASE("component and switch orders surface through the model") {
  const ImpModel model = two_block_imp();
  const OrderVector orders = model.orders();
  CHECK(orders.components == std::vector<int>{1, 1});
  CHECK(orders.switch_order == 0);
}

TEST_CASE("constructor rejects mismatched pieces") {
  Alphabet alphabet = Alphabet::from_chars("abcd");
  Partition partition(4, {{0, 1}, {2, 3}});
  std::vector<MarkovModel> components;
  components.push_back(testing::uniform_memoryless(Alphabet::from_chars("ab")));
  CHECK_THROWS_AS(ImpModel(alphabet, partition, components,
                           testing::uniform_memoryless(switch_alphabet(2))),
                  ValidationError);  // one component missing
  components.push_back(testing::uniform_memoryless(Alphabet::from_chars("xy")));
  CHECK_THROWS_AS(ImpModel(alphabet, partition, components,
                           testing::uniform_memoryless(switch_alphabet(2))),
                  ValidationError);  // labels must match the block
  components[1] = testing::uniform_memoryless(Alphabet::from_chars("cd"));
  CHECK_THROWS_AS(ImpModel(alphabet, partition, components,
                           testing::uniform_memoryless(Alphabet::from_chars("xy"))),
                  ValidationError);  // switch labels must be block indices
  const ImpModel ok(alphabet, partition, components,
                    testing::uniform_memoryless(switch_alphabet(2)));
  CHECK(ok.block_count() == 2);
}

TEST_CASE("product and sequential probabilities agree on random pairs") {
  Rng rng(51);
  for (int trial = 0; trial < 60; ++trial) {
    const ImpModel model = testing::small_random_imp(
        derive_seed(51, static_cast<std::uint64_t>(trial)), {2, 3}, {1, 1},
        trial % 2, trial % 2 ? SwitchKind::random_order1 : SwitchKind::memoryless_uniform);
    Rng sampler(derive_seed(52, static_cast<std::uint64_t>(trial)));
    const Sequence seq = interleave_sample(model, 120, sampler);
    const double prod = log2_prob_product(model, seq);
    const double seqn = log2_prob_sequential(model, seq);
    CHECK(prod == doctest::Approx(seqn).epsilon(1e-9));
    const double prod_stat = log2_prob_product(model, seq, StartMode::stationary);
    const double seqn_stat = log2_prob_sequential(model, seq, StartMode::stationary);
    CHECK(prod_stat == doctest::Approx(seqn_stat).epsilon(1e-9));
  }
}

TEST_CASE("product and sequential agree on every short word including zeros") {
  const ImpModel model = three_symbol_imp();
  for (std::size_t n = 1; n <= 6; ++n) {
    Sequence prefix;
    for_all_words(3, n, prefix, [&](const Sequence& word) {
      const double prod = log2_prob_product(model, word);
      const double seqn = log2_prob_sequential(model, word);
      if (std::isinf(prod) || std::isinf(seqn)) {
        CHECK(std::isinf(prod));
        CHECK(std::isinf(seqn));
      } else {
        CHECK(prod == doctest::Approx(seqn).epsilon(1e-9));
      }
    });
  }
}

TEST_CASE("probabilities of all length-n words sum to one") {
  const ImpModel model = three_symbol_imp();
  for (std::size_t n = 1; n <= 6; ++n) {
    double total = 0.0;
    Sequence prefix;
    for_all_words(3, n, prefix, [&](const Sequence& word) {
      const double bits = log2_prob_product(model, word);
      if (!std::isinf(bits)) total += std::exp2(bits);
    });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("the composite finite-state source reproduces the model") {
  const ImpModel model = three_symbol_imp();
  const FsmSource fsm = build_fsm(model);
  CHECK(fsm.alpha == 3);
  CHECK(fsm.state_count() <= 2 * 1 * 2);  // component contexts times switch contexts
  Rng rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    const Sequence seq = interleave_sample(model, 80, rng);
    CHECK(fsm.log2_prob(seq) == doctest::Approx(log2_prob_product(model, seq)).epsilon(1e-9));
  }
}

TEST_CASE("an interleaved sample is deterministic per seed") {
  const ImpModel model = two_block_imp();
  Rng r1(99), r2(99), r3(100);
  const Sequence s1 = interleave_sample(model, 1000, r1);
  CHECK(s1 == interleave_sample(model, 1000, r2));
  CHECK(s1 != interleave_sample(model, 1000, r3));
  for (Symbol s : s1) CHECK(s < 4);
}

TEST_CASE("build_fsm_like shares structure and rejects mismatches") {
  const ImpModel model = two_block_imp();
  const FsmSource base = build_fsm(model);
  const FsmSource same = build_fsm_like(base, model, model);
  CHECK(base.same_structure(same));
  const ImpModel other = three_symbol_imp();
  CHECK_THROWS_AS(build_fsm_like(base, model, other), StructureMismatchError);
}

TEST_CASE("interleaved and composite parameter counts match the closed forms") {
  Partition partition(15, {{0, 1, 2, 3}, {4, 5, 6, 7, 8}, {9, 10, 11, 12, 13, 14}});
  OrderVector orders;
  orders.components = {1, 1, 1};
  orders.switch_order = 0;
  CHECK(count_imp_params(partition, orders) == 64);
  CHECK(count_fsm_params(partition, orders) == 14 * 4 * 5 * 6);
  orders.switch_order = 1;
  CHECK(count_imp_params(partition, orders) == 62 + 2 * 3);
}

TEST_CASE("kappa_split_delta vanishes exactly for memoryless switches") {
  CHECK(kappa_split_delta(2, 1) == 3);
  for (std::uint64_t m = 1; m <= 10; ++m) {
    CHECK(kappa_split_delta(m, 0) == 0);
    for (int k = 1; k <= 6; ++k) CHECK(kappa_split_delta(m, k) > 0);
  }
}
