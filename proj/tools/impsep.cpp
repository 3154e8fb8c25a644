#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "impsep/cost.hpp"
#include "impsep/errors.hpp"
#include "impsep/harness.hpp"
#include "impsep/imp.hpp"
#include "impsep/markov.hpp"
#include "impsep/rng.hpp"
#include "impsep/search.hpp"
#include "impsep/serialize.hpp"
#include "impsep/sha256.hpp"
#include "impsep/structure.hpp"

#ifndef IMPSEP_VERSION
#define IMPSEP_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;
using namespace impsep;

// Exit codes: 0 success, 1 failed --assert, 2 bad input, 3 budget exceeded.
template <class F>
int run_guarded(F&& f) {
  try {
    return f();
  } catch (const BudgetExceededError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

std::optional<std::uint64_t> env_seed() {
  const char* text = std::getenv("IMPSEP_SEED");
  if (text == nullptr || *text == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(text, &end, 10);
  if (end == text || *end != '\0') throw ValidationError("IMPSEP_SEED is not a number");
  return static_cast<std::uint64_t>(value);
}

std::optional<int> env_threads() {
  const char* text = std::getenv("IMPSEP_THREADS");
  if (text == nullptr || *text == '\0') return std::nullopt;
  char* end = nullptr;
  const long value = std::strtol(text, &end, 10);
  if (end == text || *end != '\0' || value < 1) {
    throw ValidationError("IMPSEP_THREADS must be a positive number");
  }
  return static_cast<int>(value);
}

void expect_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool known = false;
    for (const char* k : allowed) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ValidationError(std::string(where) + " has an unknown field \"" + key + "\"");
    }
  }
}

json partition_to_json(const Partition& partition, const Alphabet& alphabet) {
  json blocks = json::array();
  for (const auto& block : partition.blocks()) {
    json labels = json::array();
    for (Symbol s : block) labels.push_back(alphabet.label(s));
    blocks.push_back(std::move(labels));
  }
  return blocks;
}

json cost_to_json(const CostBreakdown& cost) {
  json j;
  j["entropy_bits"] = cost.entropy_bits;
  j["kappa"] = cost.kappa;
  j["penalty_bits"] = cost.penalty_bits;
  j["total_bits"] = cost.total_bits;
  return j;
}

json orders_to_json(const OrderVector& orders) {
  json j;
  j["components"] = orders.components;
  j["switch"] = orders.switch_order;
  return j;
}

void emit_manifest(const std::string& path, const std::string& subcommand,
                   const json& resolved_config, std::uint64_t seed,
                   const std::vector<std::pair<std::string, std::string>>& inputs) {
  RunManifest m;
  m.subcommand = subcommand;
  m.config_json = resolved_config.dump();
  m.seed = seed;
  m.version = IMPSEP_VERSION;
  m.rng_name = kRngName;
  m.input_digests = inputs;
  write_text_file(path, manifest_to_json_text(m));
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string model;
  std::uint64_t n = 0;
  std::uint64_t seed = 1;
  std::string out;
  bool single_char = false;
  std::string manifest;
};

json generate_args_to_json(const GenerateArgs& a) {
  json j;
  j["model"] = a.model;
  j["n"] = a.n;
  j["seed"] = a.seed;
  j["out"] = a.out;
  j["single_char"] = a.single_char;
  j["manifest"] = a.manifest;
  return j;
}

GenerateArgs generate_args_from_json(const json& j) {
  expect_keys(j, {"model", "n", "seed", "out", "single_char", "manifest"}, "generate config");
  GenerateArgs a;
  a.model = j.at("model").get<std::string>();
  a.n = j.at("n").get<std::uint64_t>();
  a.seed = j.at("seed").get<std::uint64_t>();
  a.out = j.at("out").get<std::string>();
  a.single_char = j.at("single_char").get<bool>();
  a.manifest = j.at("manifest").get<std::string>();
  return a;
}

int run_generate(GenerateArgs args) {
  if (args.manifest.empty()) args.manifest = args.out + ".manifest.json";
  const std::string text = read_text_file(args.model);
  const std::string digest = sha256_hex(text);

  Rng rng(args.seed);
  Sequence seq;
  Alphabet alphabet;
  if (looks_like_imp_json(text)) {
    const ImpModel model = imp_from_json_text(text);
    model.validate_ergodic();
    alphabet = model.alphabet();
    seq = interleave_sample(model, static_cast<std::size_t>(args.n), rng);
  } else {
    const MarkovModel model = model_from_json_text(text);
    model.validate_ergodic();
    alphabet = model.alphabet();
    seq = sample(model, static_cast<std::size_t>(args.n), rng);
  }

  write_text_file(args.out, sequence_to_text(seq, alphabet, args.single_char));
  emit_manifest(args.manifest, "generate", generate_args_to_json(args), args.seed,
                {{args.model, digest}});
  std::cout << "wrote " << seq.size() << " symbols to " << args.out << "\n";
  return 0;
}

// ------------------------------------------------------------ deinterleave

struct DeinterleaveArgs {
  std::string input;
  double beta = 0.5;
  std::string mode = "heuristic";
  int max_blocks = 4;
  int k_cap = 3;
  std::uint64_t seed = 0;
  int restarts = 5;
  int patience = 15;
  int t = 1;
  int r = 2;
  bool single_char = false;
  std::string json_out;
  std::string streams;
  bool no_streams = false;
  std::string manifest;
};

json deinterleave_args_to_json(const DeinterleaveArgs& a) {
  json j;
  j["input"] = a.input;
  j["beta"] = a.beta;
  j["mode"] = a.mode;
  j["max_blocks"] = a.max_blocks;
  j["k_cap"] = a.k_cap;
  j["seed"] = a.seed;
  j["restarts"] = a.restarts;
  j["patience"] = a.patience;
  j["t"] = a.t;
  j["r"] = a.r;
  j["single_char"] = a.single_char;
  j["json_out"] = a.json_out;
  j["streams"] = a.streams;
  j["no_streams"] = a.no_streams;
  j["manifest"] = a.manifest;
  return j;
}

DeinterleaveArgs deinterleave_args_from_json(const json& j) {
  expect_keys(j,
              {"input", "beta", "mode", "max_blocks", "k_cap", "seed", "restarts", "patience",
               "t", "r", "single_char", "json_out", "streams", "no_streams", "manifest"},
              "deinterleave config");
  DeinterleaveArgs a;
  a.input = j.at("input").get<std::string>();
  a.beta = j.at("beta").get<double>();
  a.mode = j.at("mode").get<std::string>();
  a.max_blocks = j.at("max_blocks").get<int>();
  a.k_cap = j.at("k_cap").get<int>();
  a.seed = j.at("seed").get<std::uint64_t>();
  a.restarts = j.at("restarts").get<int>();
  a.patience = j.at("patience").get<int>();
  a.t = j.at("t").get<int>();
  a.r = j.at("r").get<int>();
  a.single_char = j.at("single_char").get<bool>();
  a.json_out = j.at("json_out").get<std::string>();
  a.streams = j.at("streams").get<std::string>();
  a.no_streams = j.at("no_streams").get<bool>();
  a.manifest = j.at("manifest").get<std::string>();
  return a;
}

bool blank_text(const std::string& text) {
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

int run_deinterleave(DeinterleaveArgs args) {
  if (args.mode != "heuristic" && args.mode != "exhaustive") {
    throw ValidationError("--mode must be heuristic or exhaustive");
  }
  if (args.streams.empty()) args.streams = args.input;
  if (args.manifest.empty()) {
    args.manifest = (args.json_out.empty() ? args.input : args.json_out) + ".manifest.json";
  }
  const std::string text = read_text_file(args.input);
  const std::string digest = sha256_hex(text);

  json out;
  if (blank_text(text)) {
    out["partition"] = json::array({json::array()});
    out["orders"] = orders_to_json(OrderVector{{0}, 0});
    out["cost"] = cost_to_json(CostBreakdown{});
  } else {
    const auto [alphabet, seq] = parse_sequence(text, args.single_char);
    CostEvaluator evaluator(seq, alphabet.size(), args.beta, args.k_cap);
    const DeinterleaveResult result = [&] {
      if (args.mode == "exhaustive") return deinterleave_exhaustive(evaluator, args.max_blocks);
      SearchParams params;
      params.restarts = args.restarts;
      params.patience = args.patience;
      params.descent_radius = args.t;
      params.perturb_radius = args.r;
      params.k_cap = args.k_cap;
      params.seed = args.seed;
      return deinterleave_heuristic(evaluator, params);
    }();
    out["partition"] = partition_to_json(result.partition, alphabet);
    out["orders"] = orders_to_json(result.orders);
    out["cost"] = cost_to_json(result.cost);

    if (!args.no_streams) {
      for (std::size_t i = 0; i < result.partition.block_count(); ++i) {
        const std::string label = block_display_label(alphabet, result.partition, i);
        const Sequence stream = project(seq, result.partition, i);
        write_text_file(args.streams + "." + label,
                        sequence_to_text(stream, alphabet, args.single_char));
      }
      std::string switch_text;
      for (Symbol block : switch_sequence(seq, result.partition)) {
        if (!switch_text.empty()) switch_text += ' ';
        switch_text += block_display_label(alphabet, result.partition, block);
      }
      if (!switch_text.empty()) switch_text += '\n';
      write_text_file(args.streams + ".switch", switch_text);
    }
  }

  const std::string out_text = out.dump(2) + "\n";
  std::cout << out_text;
  if (!args.json_out.empty()) write_text_file(args.json_out, out_text);
  emit_manifest(args.manifest, "deinterleave", deinterleave_args_to_json(args), args.seed,
                {{args.input, digest}});
  return 0;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string model;
  std::string out;
  std::string manifest;
};

json analyze_args_to_json(const AnalyzeArgs& a) {
  json j;
  j["model"] = a.model;
  j["out"] = a.out;
  j["manifest"] = a.manifest;
  return j;
}

AnalyzeArgs analyze_args_from_json(const json& j) {
  expect_keys(j, {"model", "out", "manifest"}, "analyze config");
  AnalyzeArgs a;
  a.model = j.at("model").get<std::string>();
  a.out = j.at("out").get<std::string>();
  a.manifest = j.at("manifest").get<std::string>();
  return a;
}

json domination_to_json(const DominationReport& report, const std::vector<std::string>& labels) {
  json j;
  json dom = json::object();
  for (std::size_t a = 0; a < report.label_count; ++a) {
    json dominated = json::array();
    for (std::size_t b = 0; b < report.label_count; ++b) {
      if (report.dominates[a][b]) dominated.push_back(labels[b]);
    }
    dom[labels[a]] = std::move(dominated);
  }
  j["domination"] = std::move(dom);
  json mutual = json::array();
  for (const auto& [a, b] : report.mutual_pairs) {
    mutual.push_back(json::array({labels[a], labels[b]}));
  }
  j["mutual"] = std::move(mutual);
  json total = json::array();
  for (std::size_t a : report.totally_dominant) total.push_back(labels[a]);
  j["totally_dominant"] = std::move(total);
  if (report.has_layers) {
    json layers = json::array();
    for (const auto& layer : report.layers) {
      json level = json::array();
      for (std::size_t a : layer) level.push_back(labels[a]);
      layers.push_back(std::move(level));
    }
    j["layers"] = std::move(layers);
  } else {
    j["layers"] = nullptr;
  }
  return j;
}

int run_analyze(AnalyzeArgs args) {
  if (args.manifest.empty()) {
    args.manifest = (args.out.empty() ? args.model : args.out) + ".manifest.json";
  }
  const std::string text = read_text_file(args.model);
  const std::string digest = sha256_hex(text);

  json report;
  if (looks_like_imp_json(text)) {
    const ImpModel model = imp_from_json_text(text);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < model.block_count(); ++i) {
      labels.push_back(block_display_label(model.alphabet(), model.partition(), i));
    }
    report = domination_to_json(domination_report(model.switch_model()), labels);
    const ImpModel canonical = canonicalize(model);
    report["canonical_partition"] = partition_to_json(canonical.partition(), model.alphabet());
    try {
      json parts = json::array();
      for (const Partition& p : enumerate_compatible_partitions(model)) {
        parts.push_back(partition_to_json(p, model.alphabet()));
      }
      report["compatible_partitions"] = std::move(parts);
    } catch (const Error& e) {
      report["compatible_partitions"] = nullptr;
      report["compatible_note"] = e.what();
    }
    const OrderVector orders = model.orders();
    json kappa;
    kappa["interleaved"] = count_imp_params(model.partition(), orders);
    kappa["fsm"] = count_fsm_params(model.partition(), orders);
    kappa["split_delta"] = kappa_split_delta(model.block_count(), orders.switch_order);
    report["kappa"] = std::move(kappa);
  } else {
    const MarkovModel model = model_from_json_text(text);
    report = domination_to_json(domination_report(model), model.alphabet().labels());
  }

  const std::string out_text = report.dump(2) + "\n";
  std::cout << out_text;
  if (!args.out.empty()) write_text_file(args.out, out_text);
  emit_manifest(args.manifest, "analyze", analyze_args_to_json(args), 0, {{args.model, digest}});
  return 0;
}

// ------------------------------------------------- experiment config files

struct Assertion {
  std::size_t n = 0;
  Method method = Method::ml_heuristic;
  std::string metric = "exact";
  double min = 0.0;
  double max = 1.0;
};

struct BenchmarkSpec {
  ExperimentConfig cfg;
  std::vector<Assertion> assertions;
};

BenchmarkSpec benchmark_spec_from_json(const json& j) {
  expect_keys(j,
              {"num_sequences", "lengths", "block_sizes", "orders", "switch_kind", "beta",
               "seed", "methods", "search", "exhaustive_max_blocks", "baseline_tolerance_scale",
               "threads", "rejection_budget", "switch_uniformity_tolerance", "assertions"},
              "experiment config");
  BenchmarkSpec spec;
  ExperimentConfig& cfg = spec.cfg;
  if (j.contains("num_sequences")) cfg.num_sequences = j.at("num_sequences").get<int>();
  if (j.contains("lengths")) cfg.lengths = j.at("lengths").get<std::vector<std::size_t>>();
  if (j.contains("block_sizes")) {
    cfg.block_sizes = j.at("block_sizes").get<std::vector<std::size_t>>();
  }
  if (j.contains("orders")) {
    const json& o = j.at("orders");
    expect_keys(o, {"components", "switch"}, "orders");
    cfg.orders.components = o.at("components").get<std::vector<int>>();
    cfg.orders.switch_order = o.at("switch").get<int>();
  }
  if (j.contains("switch_kind")) {
    cfg.switch_kind = switch_kind_from_name(j.at("switch_kind").get<std::string>());
  }
  if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const json& name : j.at("methods")) {
      cfg.methods.push_back(method_from_name(name.get<std::string>()));
    }
  }
  if (j.contains("search")) {
    const json& s = j.at("search");
    expect_keys(s, {"restarts", "patience", "t", "r", "k_cap"}, "search");
    if (s.contains("restarts")) cfg.search.restarts = s.at("restarts").get<int>();
    if (s.contains("patience")) cfg.search.patience = s.at("patience").get<int>();
    if (s.contains("t")) cfg.search.descent_radius = s.at("t").get<int>();
    if (s.contains("r")) cfg.search.perturb_radius = s.at("r").get<int>();
    if (s.contains("k_cap")) cfg.search.k_cap = s.at("k_cap").get<int>();
  }
  if (j.contains("exhaustive_max_blocks")) {
    cfg.exhaustive_max_blocks = j.at("exhaustive_max_blocks").get<int>();
  }
  if (j.contains("baseline_tolerance_scale")) {
    cfg.baseline_tolerance_scale = j.at("baseline_tolerance_scale").get<double>();
  }
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  if (j.contains("rejection_budget")) {
    cfg.rejection_budget = j.at("rejection_budget").get<std::uint64_t>();
  }
  if (j.contains("switch_uniformity_tolerance")) {
    cfg.switch_uniformity_tolerance = j.at("switch_uniformity_tolerance").get<double>();
  }

  for (std::size_t i = 1; i < cfg.lengths.size(); ++i) {
    if (cfg.lengths[i] <= cfg.lengths[i - 1]) {
      throw ValidationError("lengths must be strictly ascending");
    }
  }

  if (j.contains("assertions")) {
    for (const json& a : j.at("assertions")) {
      expect_keys(a, {"n", "method", "metric", "min", "max"}, "assertion");
      Assertion assertion;
      assertion.n = a.at("n").get<std::size_t>();
      assertion.method = method_from_name(a.at("method").get<std::string>());
      assertion.metric = a.at("metric").get<std::string>();
      if (assertion.metric != "exact" && assertion.metric != "canonical" &&
          assertion.metric != "compatible") {
        throw ValidationError("assertion metric must be exact, canonical or compatible");
      }
      if (a.contains("min")) assertion.min = a.at("min").get<double>();
      if (a.contains("max")) assertion.max = a.at("max").get<double>();
      spec.assertions.push_back(assertion);
    }
  }
  return spec;
}

json benchmark_spec_to_json(const BenchmarkSpec& spec) {
  const ExperimentConfig& cfg = spec.cfg;
  json j;
  j["num_sequences"] = cfg.num_sequences;
  j["lengths"] = cfg.lengths;
  j["block_sizes"] = cfg.block_sizes;
  j["orders"] = orders_to_json(cfg.orders);
  j["switch_kind"] = switch_kind_name(cfg.switch_kind);
  j["beta"] = cfg.beta;
  j["seed"] = cfg.seed;
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(method_name(m));
  j["methods"] = std::move(methods);
  json search;
  search["restarts"] = cfg.search.restarts;
  search["patience"] = cfg.search.patience;
  search["t"] = cfg.search.descent_radius;
  search["r"] = cfg.search.perturb_radius;
  search["k_cap"] = cfg.search.k_cap;
  j["search"] = std::move(search);
  j["exhaustive_max_blocks"] = cfg.exhaustive_max_blocks;
  j["baseline_tolerance_scale"] = cfg.baseline_tolerance_scale;
  j["threads"] = cfg.threads;
  j["rejection_budget"] = cfg.rejection_budget;
  j["switch_uniformity_tolerance"] = cfg.switch_uniformity_tolerance;
  json assertions = json::array();
  for (const Assertion& a : spec.assertions) {
    json item;
    item["n"] = a.n;
    item["method"] = method_name(a.method);
    item["metric"] = a.metric;
    item["min"] = a.min;
    item["max"] = a.max;
    assertions.push_back(std::move(item));
  }
  j["assertions"] = std::move(assertions);
  return j;
}

// --------------------------------------------------------------- benchmark

struct BenchmarkArgs {
  std::string config;
  std::string out;
  bool assert_mode = false;
  std::string manifest;
  json experiment;  // resolved spec; filled by the runner when empty
};

json benchmark_args_to_json(const BenchmarkArgs& a) {
  json j;
  j["config"] = a.config;
  j["out"] = a.out;
  j["assert"] = a.assert_mode;
  j["manifest"] = a.manifest;
  j["experiment"] = a.experiment;
  return j;
}

BenchmarkArgs benchmark_args_from_json(const json& j) {
  expect_keys(j, {"config", "out", "assert", "manifest", "experiment"}, "benchmark config");
  BenchmarkArgs a;
  a.config = j.at("config").get<std::string>();
  a.out = j.at("out").get<std::string>();
  a.assert_mode = j.at("assert").get<bool>();
  a.manifest = j.at("manifest").get<std::string>();
  a.experiment = j.at("experiment");
  return a;
}

int check_assertions(const ResultTable& table, const std::vector<Assertion>& assertions) {
  int failures = 0;
  for (const Assertion& a : assertions) {
    const MethodOutcome* outcome = table.find(a.n, a.method);
    double value = 0.0;
    bool present = outcome != nullptr;
    if (present) {
      value = a.metric == "canonical" ? outcome->canonical
              : a.metric == "compatible" ? outcome->compatible
                                         : outcome->exact;
    }
    const bool pass = present && value >= a.min && value <= a.max;
    std::cout << (pass ? "[ok]   " : "[FAIL] ") << method_name(a.method) << " " << a.metric
              << " at n=" << a.n;
    if (present) {
      std::cout << ": " << value << " (want [" << a.min << ", " << a.max << "])\n";
    } else {
      std::cout << ": no such result row\n";
    }
    if (!pass) ++failures;
  }
  return failures;
}

int run_benchmark(BenchmarkArgs args, bool use_env) {
  if (args.manifest.empty()) {
    args.manifest = (args.out.empty() ? args.config : args.out) + ".manifest.json";
  }
  const std::string text = read_text_file(args.config);
  const std::string digest = sha256_hex(text);

  BenchmarkSpec spec;
  if (args.experiment.is_object()) {
    spec = benchmark_spec_from_json(args.experiment);
  } else {
    json parsed;
    try {
      parsed = json::parse(text);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("experiment config: ") + e.what());
    }
    try {
      spec = benchmark_spec_from_json(parsed);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("experiment config: ") + e.what());
    }
    if (use_env) {
      if (const auto seed = env_seed()) spec.cfg.seed = *seed;
      if (const auto threads = env_threads()) spec.cfg.threads = *threads;
    }
    args.experiment = benchmark_spec_to_json(spec);
  }

  const ResultTable table = run_experiment(spec.cfg);
  std::cout << table.formatted();
  if (!args.out.empty()) {
    write_text_file(args.out, table.csv());
  } else {
    std::cout << table.csv();
  }
  emit_manifest(args.manifest, "benchmark", benchmark_args_to_json(args), spec.cfg.seed,
                {{args.config, digest}});

  if (args.assert_mode) {
    const int failures = check_assertions(table, spec.assertions);
    if (failures > 0) {
      std::cout << failures << " assertion(s) failed\n";
      return 1;
    }
    std::cout << "all assertions passed\n";
  }
  return 0;
}

// --------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string config;
  std::vector<double> scales{0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
  std::string out;
  std::string manifest;
  json experiment;
};

json calibrate_args_to_json(const CalibrateArgs& a) {
  json j;
  j["config"] = a.config;
  j["scales"] = a.scales;
  j["out"] = a.out;
  j["manifest"] = a.manifest;
  j["experiment"] = a.experiment;
  return j;
}

CalibrateArgs calibrate_args_from_json(const json& j) {
  expect_keys(j, {"config", "scales", "out", "manifest", "experiment"}, "calibrate config");
  CalibrateArgs a;
  a.config = j.at("config").get<std::string>();
  a.scales = j.at("scales").get<std::vector<double>>();
  a.out = j.at("out").get<std::string>();
  a.manifest = j.at("manifest").get<std::string>();
  a.experiment = j.at("experiment");
  return a;
}

int run_calibrate(CalibrateArgs args, bool use_env) {
  if (args.scales.empty()) throw ValidationError("need at least one scale");
  if (args.manifest.empty()) {
    args.manifest = (args.out.empty() ? args.config : args.out) + ".manifest.json";
  }
  const std::string text = read_text_file(args.config);
  const std::string digest = sha256_hex(text);

  BenchmarkSpec spec;
  if (args.experiment.is_object()) {
    spec = benchmark_spec_from_json(args.experiment);
  } else {
    json parsed;
    try {
      parsed = json::parse(text);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("experiment config: ") + e.what());
    }
    spec = benchmark_spec_from_json(parsed);
    if (use_env) {
      if (const auto seed = env_seed()) spec.cfg.seed = *seed;
      if (const auto threads = env_threads()) spec.cfg.threads = *threads;
    }
    args.experiment = benchmark_spec_to_json(spec);
  }

  const CalibrationResult result = calibrate_baseline(spec.cfg, args.scales);
  std::cout << result.csv();
  if (!args.out.empty()) write_text_file(args.out, result.csv());
  emit_manifest(args.manifest, "calibrate", calibrate_args_to_json(args), spec.cfg.seed,
                {{args.config, digest}});
  return 0;
}

// ------------------------------------------------------------------ replay

int run_replay(const std::string& manifest_path) {
  const RunManifest m = manifest_from_json_text(read_text_file(manifest_path));
  if (m.rng_name != kRngName) {
    throw ValidationError("manifest was written with a different generator: " + m.rng_name);
  }
  for (const auto& [path, digest] : m.input_digests) {
    const std::string current = sha256_hex(read_text_file(path));
    if (current != digest) {
      throw ValidationError("input file changed since the manifest was written: " + path);
    }
  }
  json config;
  try {
    config = json::parse(m.config_json);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest config: ") + e.what());
  }
  try {
    if (m.subcommand == "generate") return run_generate(generate_args_from_json(config));
    if (m.subcommand == "deinterleave") {
      return run_deinterleave(deinterleave_args_from_json(config));
    }
    if (m.subcommand == "analyze") return run_analyze(analyze_args_from_json(config));
    if (m.subcommand == "benchmark") {
      return run_benchmark(benchmark_args_from_json(config), false);
    }
    if (m.subcommand == "calibrate") {
      return run_calibrate(calibrate_args_from_json(config), false);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest config: ") + e.what());
  }
  throw ValidationError("manifest names an unknown subcommand: " + m.subcommand);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interleaved Markov process toolkit"};
  app.set_version_flag("--version", IMPSEP_VERSION);
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "sample a sequence from a model file");
  generate->add_option("model", gen.model, "model JSON file")->required();
  generate->add_option("-n,--n", gen.n, "number of symbols")->required();
  generate->add_option("--seed", gen.seed, "random seed (default 1)");
  generate->add_option("-o,--out", gen.out, "output sequence file")->required();
  generate->add_flag("--single-char", gen.single_char, "write contiguous one-character labels");
  generate->add_option("--manifest", gen.manifest, "manifest path (default <out>.manifest.json)");

  DeinterleaveArgs dei;
  CLI::App* deinterleave =
      app.add_subcommand("deinterleave", "recover the block partition of a sequence");
  deinterleave->add_option("input", dei.input, "sequence file")->required();
  deinterleave->add_option("--beta", dei.beta, "penalty coefficient (default 0.5)");
  deinterleave->add_option("--mode", dei.mode, "heuristic or exhaustive (default heuristic)");
  deinterleave->add_option("--max-blocks", dei.max_blocks,
                           "block cap for exhaustive mode (default 4)");
  deinterleave->add_option("--k-cap", dei.k_cap, "largest order searched per stream (default 3)");
  deinterleave->add_option("--seed", dei.seed, "random seed for heuristic mode (default 0)");
  deinterleave->add_option("--restarts", dei.restarts, "heuristic restarts (default 5)");
  deinterleave->add_option("--patience", dei.patience,
                           "perturbation rounds without improvement before a restart ends "
                           "(default 15)");
  deinterleave->add_option("--t", dei.t, "descent neighborhood radius (default 1)");
  deinterleave->add_option("--r", dei.r, "perturbation neighborhood radius (default 2)");
  deinterleave->add_flag("--single-char", dei.single_char,
                         "read contiguous one-character labels");
  deinterleave->add_option("--json", dei.json_out, "also write the JSON result to this file");
  deinterleave->add_option("--streams", dei.streams,
                           "prefix for per-stream output files (default: the input path)");
  deinterleave->add_flag("--no-streams", dei.no_streams, "skip per-stream output files");
  deinterleave->add_option("--manifest", dei.manifest, "manifest path");

  AnalyzeArgs ana;
  CLI::App* analyze = app.add_subcommand("analyze", "structural report for a model file");
  analyze->add_option("model", ana.model, "model JSON file (interleaved model, or a bare "
                                          "switch over block labels)")
      ->required();
  analyze->add_option("-o,--out", ana.out, "also write the report to this file");
  analyze->add_option("--manifest", ana.manifest, "manifest path");

  BenchmarkArgs ben;
  CLI::App* benchmark = app.add_subcommand("benchmark", "run a seeded experiment suite");
  benchmark->add_option("--config", ben.config, "experiment config JSON file")->required();
  benchmark->add_option("-o,--out", ben.out, "CSV output path");
  benchmark->add_flag("--assert", ben.assert_mode,
                      "check the config's assertions and exit 1 on violation");
  benchmark->add_option("--manifest", ben.manifest, "manifest path");
  std::uint64_t ben_seed = 0;
  CLI::Option* ben_seed_opt = benchmark->add_option("--seed", ben_seed, "override the config seed");
  int ben_threads = 0;
  CLI::Option* ben_threads_opt =
      benchmark->add_option("--threads", ben_threads, "override the config thread count");

  CalibrateArgs cal;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "sweep the baseline tolerance scale over an experiment");
  calibrate->add_option("--config", cal.config, "experiment config JSON file")->required();
  calibrate->add_option("--scales", cal.scales, "tolerance scales to sweep")->delimiter(',');
  calibrate->add_option("-o,--out", cal.out, "CSV output path");
  calibrate->add_option("--manifest", cal.manifest, "manifest path");

  std::string replay_manifest;
  CLI::App* replay = app.add_subcommand("replay", "re-run the invocation a manifest records");
  replay->add_option("manifest", replay_manifest, "manifest JSON file")->required();

  int rc = 0;
  generate->callback([&] {
    rc = run_guarded([&] {
      if (const auto seed = env_seed()) gen.seed = *seed;
      return run_generate(gen);
    });
  });
  deinterleave->callback([&] {
    rc = run_guarded([&] {
      if (const auto seed = env_seed()) dei.seed = *seed;
      return run_deinterleave(dei);
    });
  });
  analyze->callback([&] { rc = run_guarded([&] { return run_analyze(ana); }); });
  benchmark->callback([&] {
    rc = run_guarded([&] {
      const std::string text = read_text_file(ben.config);
      json parsed;
      try {
        parsed = json::parse(text);
      } catch (const json::exception& e) {
        throw ValidationError(std::string("experiment config: ") + e.what());
      }
      BenchmarkSpec spec = benchmark_spec_from_json(parsed);
      if (ben_seed_opt->count() > 0) spec.cfg.seed = ben_seed;
      if (ben_threads_opt->count() > 0) spec.cfg.threads = ben_threads;
      if (const auto seed = env_seed()) spec.cfg.seed = *seed;
      if (const auto threads = env_threads()) spec.cfg.threads = *threads;
      ben.experiment = benchmark_spec_to_json(spec);
      return run_benchmark(ben, false);
    });
  });
  calibrate->callback([&] { rc = run_guarded([&] { return run_calibrate(cal, true); }); });
  replay->callback([&] { rc = run_guarded([&] { return run_replay(replay_manifest); }); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return rc;
}
