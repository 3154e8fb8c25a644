#include <doctest.h>

#include <cmath>

#include "impsep/harness.hpp"
#include "support/builders.hpp"

using namespace impsep;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig config;
  config.num_sequences = 4;
  config.lengths = {300, 800};
  config.block_sizes = {2, 2};
  config.orders.components = {1, 1};
  config.orders.switch_order = 0;
  config.switch_kind = SwitchKind::memoryless_uniform;
  config.seed = 21;
  config.methods = {Method::ml_heuristic, Method::baseline};
  return config;
}

}  // namespace

TEST_CASE("method and switch-kind names round trip") {
  for (Method m : {Method::ml_exhaustive, Method::ml_heuristic, Method::baseline}) {
    CHECK(method_from_name(method_name(m)) == m);
  }
  for (SwitchKind k : {SwitchKind::memoryless_uniform, SwitchKind::random_order1}) {
    CHECK(switch_kind_from_name(switch_kind_name(k)) == k);
  }
  CHECK_THROWS_AS(method_from_name("gradient"), ValidationError);
  CHECK_THROWS_AS(switch_kind_from_name("periodic"), ValidationError);
}

TEST_CASE("random generating models have exact structure") {
  ExperimentConfig config = tiny_config();
  config.block_sizes = {4, 5, 6};
  config.orders.components = {1, 1, 1};
  Rng rng(31);
  const ImpModel model = random_imp(config, rng);
  CHECK(model.alphabet().size() == 15);
  CHECK(model.partition() ==
        Partition(15, {{0, 1, 2, 3}, {4, 5, 6, 7, 8}, {9, 10, 11, 12, 13, 14}}));
  for (std::size_t i = 0; i < 3; ++i) {
    const MarkovModel& c = model.component(i);
    CHECK(c.order() == 1);
    for (StateCode s : c.states()) {
      double sum = 0.0;
      for (double v : c.row(s)) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  for (StateCode s : model.switch_model().states()) {
    for (double v : model.switch_model().row(s)) CHECK(v == 1.0 / 3.0);
  }
  CHECK_NOTHROW(model.validate_ergodic());
}

TEST_CASE("order-one switches are near uniform and domination free") {
  ExperimentConfig config = tiny_config();
  config.orders.switch_order = 1;
  config.switch_kind = SwitchKind::random_order1;
  Rng rng(32);
  const ImpModel model = random_imp(config, rng);
  CHECK(model.switch_model().order() == 1);
  const std::vector<double> pi = stationary_distribution(model.switch_model());
  for (double v : pi) CHECK(std::abs(v - 0.5) <= config.switch_uniformity_tolerance);
  const DominationReport report = domination_report(model.switch_model());
  CHECK(report.mutual_pairs.empty());
  for (const auto& row : report.dominates) {
    for (bool d : row) CHECK_FALSE(d);
  }

  Rng rng2(32);
  const ImpModel again = random_imp(config, rng2);
  CHECK(again.partition() == model.partition());
  CHECK(again.switch_model().row(0) == model.switch_model().row(0));
}

TEST_CASE("config validation refuses inconsistent shapes") {
  ExperimentConfig config = tiny_config();
  config.orders.components = {1};
  Rng rng(33);
  CHECK_THROWS_AS(random_imp(config, rng), ValidationError);

  ExperimentConfig wrong_kind = tiny_config();
  wrong_kind.orders.switch_order = 1;  // memoryless kind demands order zero
  CHECK_THROWS_AS(random_imp(wrong_kind, rng), ValidationError);

  ExperimentConfig starved = tiny_config();
  starved.orders.switch_order = 1;
  starved.switch_kind = SwitchKind::random_order1;
  starved.rejection_budget = 0;
  CHECK_THROWS_AS(random_imp(starved, rng), RejectionBudgetExceededError);
}

TEST_CASE("judgement distinguishes exact, canonical and compatible recovery") {
  // Blocks {a}, {b} are split parts of one memoryless block behind an
  // order-1 switch built to keep the split mergeable; {cd} keeps memory.
  Alphabet alphabet = Alphabet::from_chars("abcd");
  Partition partition(4, {{0}, {1}, {2, 3}});
  std::vector<MarkovModel> components;
  components.push_back(testing::uniform_memoryless(Alphabet::from_chars("a")));
  components.push_back(testing::uniform_memoryless(Alphabet::from_chars("b")));
  {
    testing::Rows rows;
    rows[{0}] = {0.8, 0.2};
    rows[{1}] = {0.3, 0.7};
    components.emplace_back(Alphabet::from_chars("cd"), 1, std::move(rows),
                            std::vector<Symbol>{0});
  }
  testing::Rows sw;
  sw[{0}] = {0.24, 0.16, 0.6};
  sw[{1}] = {0.24, 0.16, 0.6};
  sw[{2}] = {0.3, 0.2, 0.5};
  MarkovModel switch_model(switch_alphabet(3), 1, std::move(sw), {0});
  const ImpModel truth(alphabet, partition, std::move(components), std::move(switch_model));

  const Judgement on_truth = judge(truth.partition(), truth);
  CHECK(on_truth.exact);
  CHECK_FALSE(on_truth.canonical);  // the canonical form merges {a} and {b}
  CHECK(on_truth.compatible);

  const Judgement on_canonical = judge(Partition(4, {{0, 1}, {2, 3}}), truth);
  CHECK_FALSE(on_canonical.exact);
  CHECK(on_canonical.canonical);
  CHECK(on_canonical.compatible);

  const Judgement on_wrong = judge(Partition(4, {{0, 2}, {1, 3}}), truth);
  CHECK_FALSE(on_wrong.exact);
  CHECK_FALSE(on_wrong.canonical);
  CHECK_FALSE(on_wrong.compatible);
}

TEST_CASE("judgement falls back to canonical when domination blocks enumeration") {
  Alphabet alphabet = Alphabet::from_chars("xyz");
  Partition partition = Partition::singletons(3);
  std::vector<MarkovModel> components;
  for (Symbol s = 0; s < 3; ++s) {
    components.push_back(testing::uniform_memoryless(
        Alphabet(std::vector<std::string>{alphabet.label(s)})));
  }
  const ImpModel truth(alphabet, partition, std::move(components),
                       testing::example_switch(0.4, 0.3, switch_alphabet(3)));
  const Judgement j = judge(truth.partition(), truth);
  CHECK(j.exact);
  CHECK(j.compatible == j.canonical);
}

TEST_CASE("experiment tables are stable across thread counts") {
  ExperimentConfig serial = tiny_config();
  serial.threads = 1;
  ExperimentConfig parallel = tiny_config();
  parallel.threads = 4;
  const ResultTable a = run_experiment(serial);
  const ResultTable b = run_experiment(parallel);
  CHECK(a.csv() == b.csv());
  REQUIRE(a.rows.size() == 4);  // two lengths, two methods
  CHECK(a.rows[0].n == 300);
  const MethodOutcome* heuristic = a.find(800, Method::ml_heuristic);
  REQUIRE(heuristic != nullptr);
  CHECK(heuristic->exact >= 0.0);
  CHECK(heuristic->exact <= 1.0);
  CHECK(a.find(800, Method::ml_exhaustive) == nullptr);
}

TEST_CASE("result tables format as CSV with fixed columns") {
  ExperimentConfig config = tiny_config();
  config.lengths = {300};
  config.methods = {Method::ml_heuristic};
  const ResultTable table = run_experiment(config);
  const std::string csv = table.csv();
  CHECK(csv.find("n,method,success_exact,success_canonical,success_compatible\n") == 0);
  CHECK(csv.find("300,ml_heuristic,") != std::string::npos);
  CHECK(table.formatted().find("ml_heuristic") != std::string::npos);
}

TEST_CASE("experiment validation rejects malformed configurations") {
  ExperimentConfig config = tiny_config();
  config.lengths = {};
  CHECK_THROWS_AS(run_experiment(config), ValidationError);
  config = tiny_config();
  config.num_sequences = 0;
  CHECK_THROWS_AS(run_experiment(config), ValidationError);
  config = tiny_config();
  config.methods = {};
  CHECK_THROWS_AS(run_experiment(config), ValidationError);
}

TEST_CASE("the pairwise baseline joins dependent symbols and only those") {
  // Deterministic alternation inside {a, b}, with c emitted independently.
  Alphabet abc = Alphabet::from_chars("abc");
  Rng rng(34);
  Sequence seq;
  Symbol ab_state = 0;
  for (int t = 0; t < 20000; ++t) {
    if (rng.next_below(2) == 0) {
      seq.push_back(ab_state);
      ab_state = 1 - ab_state;
    } else {
      seq.push_back(2);
    }
  }
  const Partition found = baseline_deinterleave(seq, 3, 0.08);
  CHECK(found == Partition(3, {{0, 1}, {2}}));
}

TEST_CASE("an over-tight baseline tolerance collapses everything") {
  Rng rng(35);
  Sequence seq;
  for (int t = 0; t < 5000; ++t) seq.push_back(static_cast<Symbol>(rng.next_below(3)));
  const Partition loose = baseline_deinterleave(seq, 3, 5.0);
  CHECK(loose == Partition::singletons(3));
  const Partition tight = baseline_deinterleave(seq, 3, 0.0);
  CHECK(tight == Partition::single_block(3));
}

TEST_CASE("baseline calibration sweeps scales over the shared trials") {
  ExperimentConfig config = tiny_config();
  config.methods = {Method::baseline};
  config.lengths = {500};
  const CalibrationResult result = calibrate_baseline(config, {0.05, 0.2});
  REQUIRE(result.rows.size() == 2);
  CHECK(result.rows[0].scale == 0.05);
  CHECK(result.rows[1].scale == 0.2);
  CHECK(result.rows[0].n == 500);
  const std::string csv = result.csv();
  CHECK(csv.find("scale,n,success_exact,success_canonical,success_compatible\n") == 0);
}
