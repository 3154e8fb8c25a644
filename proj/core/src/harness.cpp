#include "impsep/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace impsep {

const char* method_name(Method m) {
  switch (m) {
    case Method::ml_exhaustive: return "ml_exhaustive";
    case Method::ml_heuristic: return "ml_heuristic";
    case Method::baseline: return "baseline";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "ml_exhaustive") return Method::ml_exhaustive;
  if (name == "ml_heuristic") return Method::ml_heuristic;
  if (name == "baseline") return Method::baseline;
  throw ValidationError("unknown method: " + name);
}

const char* switch_kind_name(SwitchKind k) {
  switch (k) {
    case SwitchKind::memoryless_uniform: return "memoryless-uniform";
    case SwitchKind::random_order1: return "random-order-1";
  }
  return "unknown";
}

SwitchKind switch_kind_from_name(const std::string& name) {
  if (name == "memoryless-uniform") return SwitchKind::memoryless_uniform;
  if (name == "random-order-1") return SwitchKind::random_order1;
  throw ValidationError("unknown switch kind: " + name);
}

namespace {

std::vector<double> flat_simplex_row(std::size_t width, Rng& rng) {
  std::vector<double> row(width);
  double sum = 0.0;
  for (double& v : row) {
    v = -std::log(rng.next_double_open());
    sum += v;
  }
  for (double& v : row) v /= sum;
  return row;
}

// All length-k contexts over an alphabet of the given size, ascending.
std::vector<std::vector<Symbol>> all_contexts(std::size_t alpha, int order) {
  std::vector<std::vector<Symbol>> out;
  std::vector<Symbol> ctx(static_cast<std::size_t>(order), 0);
  while (true) {
    out.push_back(ctx);
    int pos = order - 1;
    while (pos >= 0) {
      if (++ctx[static_cast<std::size_t>(pos)] < alpha) break;
      ctx[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

MarkovModel random_markov(const Alphabet& alphabet, int order, Rng& rng) {
  std::map<std::vector<Symbol>, std::vector<double>> rows;
  const auto contexts = all_contexts(alphabet.size(), order);
  for (const auto& ctx : contexts) rows.emplace(ctx, flat_simplex_row(alphabet.size(), rng));
  const std::size_t pick = static_cast<std::size_t>(rng.next_below(contexts.size()));
  return MarkovModel(alphabet, order, std::move(rows), contexts[pick]);
}

bool domination_free(const MarkovModel& switch_model) {
  const DominationReport report = domination_report(switch_model);
  for (const auto& row : report.dominates) {
    for (bool d : row) {
      if (d) return false;
    }
  }
  return true;
}

}  // namespace

ImpModel random_imp(const ExperimentConfig& config, Rng& rng) {
  if (config.block_sizes.empty()) throw ValidationError("need at least one block size");
  if (config.orders.components.size() != config.block_sizes.size()) {
    throw ValidationError("one component order per block size required");
  }
  if (config.switch_kind == SwitchKind::memoryless_uniform && config.orders.switch_order != 0) {
    throw ValidationError("the memoryless-uniform switch has order 0");
  }
  if (config.switch_kind == SwitchKind::random_order1 && config.orders.switch_order != 1) {
    throw ValidationError("the random-order-1 switch has order 1");
  }

  std::size_t total = 0;
  for (std::size_t s : config.block_sizes) {
    if (s == 0) throw ValidationError("block sizes must be positive");
    total += s;
  }
  const Alphabet alphabet = Alphabet::of_size(total);

  std::vector<std::vector<Symbol>> blocks;
  Symbol next_symbol = 0;
  for (std::size_t s : config.block_sizes) {
    std::vector<Symbol> block;
    for (std::size_t i = 0; i < s; ++i) block.push_back(next_symbol++);
    blocks.push_back(std::move(block));
  }
  Partition partition(total, std::move(blocks));

  std::vector<MarkovModel> components;
  for (std::size_t i = 0; i < partition.block_count(); ++i) {
    std::vector<std::string> labels;
    for (Symbol s : partition.block(i)) labels.push_back(alphabet.label(s));
    components.push_back(
        random_markov(Alphabet(std::move(labels)), config.orders.components[i], rng));
  }

  const std::size_t m = partition.block_count();
  std::optional<MarkovModel> sw;
  if (config.switch_kind == SwitchKind::memoryless_uniform) {
    std::map<std::vector<Symbol>, std::vector<double>> rows;
    rows.emplace(std::vector<Symbol>{},
                 std::vector<double>(m, 1.0 / static_cast<double>(m)));
    sw.emplace(switch_alphabet(m), 0, std::move(rows), std::vector<Symbol>{});
  } else {
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (attempt >= config.rejection_budget) {
        throw RejectionBudgetExceededError("no acceptable switch after " +
                                           std::to_string(attempt) + " draws");
      }
      MarkovModel candidate = random_markov(switch_alphabet(m), 1, rng);
      const std::vector<double> pi = stationary_distribution(candidate);
      double dev = 0.0;
      for (double p : pi) dev = std::max(dev, std::fabs(p - 1.0 / static_cast<double>(m)));
      if (dev > config.switch_uniformity_tolerance) continue;
      if (!domination_free(candidate)) continue;
      sw.emplace(std::move(candidate));
      break;
    }
  }

  ImpModel model(alphabet, std::move(partition), std::move(components), std::move(*sw));
  model.validate_ergodic();
  return model;
}

Judgement judge(const Partition& result, const ImpModel& truth) {
  Judgement j;
  j.exact = result == truth.partition();
  const ImpModel canon = canonicalize(truth);
  j.canonical = result == canon.partition();
  try {
    for (const Partition& p : enumerate_compatible_partitions(truth)) {
      if (p == result) {
        j.compatible = true;
        break;
      }
    }
  } catch (const DominationPresentError&) {
    j.compatible = j.canonical;
  } catch (const SearchSpaceTooLargeError&) {
    j.compatible = j.canonical;
  }
  return j;
}

const MethodOutcome* ResultTable::find(std::size_t n, Method method) const {
  for (const auto& row : rows) {
    if (row.n == n && row.method == method) return &row.outcome;
  }
  return nullptr;
}

std::string ResultTable::csv() const {
  std::string out = "n,method,success_exact,success_canonical,success_compatible\n";
  char line[160];
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "%zu,%s,%.6f,%.6f,%.6f\n", row.n, method_name(row.method),
                  row.outcome.exact, row.outcome.canonical, row.outcome.compatible);
    out += line;
  }
  return out;
}

std::string ResultTable::formatted() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%10s  %-14s  %8s  %10s  %11s\n", "n", "method", "exact",
                "canonical", "compatible");
  out += line;
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "%10zu  %-14s  %8.3f  %10.3f  %11.3f\n", row.n,
                  method_name(row.method), row.outcome.exact, row.outcome.canonical,
                  row.outcome.compatible);
    out += line;
  }
  return out;
}

namespace {

struct TrialCells {
  std::vector<Judgement> cells;  // lengths x methods
};

TrialCells run_trial(const ExperimentConfig& config, std::uint64_t trial) {
  const std::uint64_t trial_seed = derive_seed(config.seed, trial);
  Rng rng(trial_seed);
  const ImpModel truth = random_imp(config, rng);
  const std::size_t alpha = truth.alphabet().size();

  const std::size_t max_n = *std::max_element(config.lengths.begin(), config.lengths.end());
  const Sequence full = interleave_sample(truth, max_n, rng);

  const bool needs_evaluator =
      std::any_of(config.methods.begin(), config.methods.end(), [](Method m) {
        return m == Method::ml_exhaustive || m == Method::ml_heuristic;
      });

  TrialCells out;
  out.cells.resize(config.lengths.size() * config.methods.size());
  for (std::size_t li = 0; li < config.lengths.size(); ++li) {
    const std::size_t n = config.lengths[li];
    const Sequence prefix(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n));
    std::optional<CostEvaluator> evaluator;
    if (needs_evaluator) {
      evaluator.emplace(prefix, alpha, config.beta, config.search.k_cap);
    }
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      const Method method = config.methods[mi];
      Partition result = Partition::single_block(alpha);
      switch (method) {
        case Method::ml_heuristic: {
          SearchParams params = config.search;
          params.seed = derive_seed(trial_seed, 1000 + li);
          result = deinterleave_heuristic(*evaluator, params).partition;
          break;
        }
        case Method::ml_exhaustive:
          result = deinterleave_exhaustive(*evaluator, config.exhaustive_max_blocks).partition;
          break;
        case Method::baseline:
          result = baseline_deinterleave(prefix, alpha, config.baseline_tolerance_scale);
          break;
      }
      out.cells[li * config.methods.size() + mi] = judge(result, truth);
    }
  }
  return out;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config) {
  if (config.num_sequences < 1) throw ValidationError("need at least one sequence");
  if (config.lengths.empty()) throw ValidationError("need at least one length");
  if (config.methods.empty()) throw ValidationError("need at least one method");
  for (std::size_t n : config.lengths) {
    if (n == 0) throw ValidationError("lengths must be positive");
  }

  const auto trials = static_cast<std::size_t>(config.num_sequences);
  std::vector<TrialCells> per_trial(trials);

  const std::size_t hardware = std::max(1u, std::thread::hardware_concurrency());
  std::size_t workers = config.threads >= 1 ? static_cast<std::size_t>(config.threads) : hardware;
  workers = std::min(workers, trials);

  if (workers <= 1) {
    for (std::size_t trial = 0; trial < trials; ++trial) {
      per_trial[trial] = run_trial(config, trial);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t trial = next.fetch_add(1);
          if (trial >= trials || failed.load()) return;
          try {
            per_trial[trial] = run_trial(config, trial);
          } catch (const std::exception& e) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            error = e.what();
            failed.store(true);
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) throw Error("experiment trial failed: " + error);
  }

  ResultTable table;
  for (std::size_t li = 0; li < config.lengths.size(); ++li) {
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      ResultRow row;
      row.n = config.lengths[li];
      row.method = config.methods[mi];
      std::size_t exact = 0, canonical = 0, compatible = 0;
      for (std::size_t trial = 0; trial < trials; ++trial) {
        const Judgement& j = per_trial[trial].cells[li * config.methods.size() + mi];
        exact += j.exact ? 1 : 0;
        canonical += j.canonical ? 1 : 0;
        compatible += j.compatible ? 1 : 0;
      }
      const auto denom = static_cast<double>(trials);
      row.outcome.exact = static_cast<double>(exact) / denom;
      row.outcome.canonical = static_cast<double>(canonical) / denom;
      row.outcome.compatible = static_cast<double>(compatible) / denom;
      table.rows.push_back(row);
    }
  }
  return table;
}

Partition baseline_deinterleave(const Sequence& seq, std::size_t alpha,
                                double tolerance_scale) {
  if (alpha == 0) throw ValidationError("baseline needs a nonempty alphabet");
  std::vector<std::size_t> parent(alpha);
  for (std::size_t i = 0; i < alpha; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](std::size_t a, std::size_t b) {
    const std::size_t ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  };

  const std::size_t n = seq.size();
  if (n >= 2) {
    std::vector<std::uint64_t> uni(alpha, 0);
    std::vector<std::uint64_t> big(alpha * alpha, 0);
    for (Symbol s : seq) {
      if (s >= alpha) throw UnknownSymbolError("sequence symbol out of range");
      ++uni[s];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++big[static_cast<std::size_t>(seq[i]) * alpha + seq[i + 1]];
    }
    const double tau =
        tolerance_scale * std::sqrt(std::log(static_cast<double>(n) + 1.0) /
                                    static_cast<double>(n));
    const double dn = static_cast<double>(n);
    const double dpairs = static_cast<double>(n - 1);
    for (std::size_t a = 0; a < alpha; ++a) {
      for (std::size_t b = 0; b < alpha; ++b) {
        if (a == b) continue;
        const double joint = static_cast<double>(big[a * alpha + b]) / dpairs;
        const double indep = (static_cast<double>(uni[a]) / dn) *
                             (static_cast<double>(uni[b]) / dn);
        if (std::fabs(joint - indep) > tau) unite(a, b);
      }
    }
  }
  std::vector<std::size_t> assign(alpha);
  for (std::size_t s = 0; s < alpha; ++s) assign[s] = find(s);
  return Partition::from_assignment(assign);
}

std::string CalibrationResult::csv() const {
  std::string out = "scale,n,success_exact,success_canonical,success_compatible\n";
  char line[160];
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "%.4f,%zu,%.6f,%.6f,%.6f\n", row.scale, row.n,
                  row.outcome.exact, row.outcome.canonical, row.outcome.compatible);
    out += line;
  }
  return out;
}

CalibrationResult calibrate_baseline(const ExperimentConfig& config,
                                     const std::vector<double>& scales) {
  CalibrationResult result;
  for (double scale : scales) {
    ExperimentConfig sweep = config;
    sweep.methods = {Method::baseline};
    sweep.baseline_tolerance_scale = scale;
    const ResultTable table = run_experiment(sweep);
    for (const auto& row : table.rows) {
      result.rows.push_back(CalibrationRow{scale, row.n, row.outcome});
    }
  }
  return result;
}

}  // namespace impsep
