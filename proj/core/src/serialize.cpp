#include "impsep/serialize.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "impsep/errors.hpp"

namespace impsep {

namespace {

using nlohmann::json;

void require_no_comma(const Alphabet& alphabet) {
  for (std::size_t s = 0; s < alphabet.size(); ++s) {
    if (alphabet.label(static_cast<Symbol>(s)).find(',') != std::string::npos) {
      throw ValidationError("labels may not contain commas: " +
                            alphabet.label(static_cast<Symbol>(s)));
    }
  }
}

json model_to_json(const MarkovModel& model) {
  require_no_comma(model.alphabet());
  json j;
  json labels = json::array();
  for (std::size_t s = 0; s < model.alpha(); ++s) {
    labels.push_back(model.alphabet().label(static_cast<Symbol>(s)));
  }
  j["alphabet"] = std::move(labels);
  j["order"] = model.order();
  json initial = json::array();
  for (Symbol s : model.initial_state()) initial.push_back(model.alphabet().label(s));
  j["initial_state"] = std::move(initial);
  json transitions = json::object();
  for (StateCode code : model.states()) {
    std::string ctx;
    bool first = true;
    for (Symbol s : model.decode_state(code)) {
      if (!first) ctx += ',';
      ctx += model.alphabet().label(s);
      first = false;
    }
    json row = json::object();
    const std::vector<double>& probs = model.row(code);
    for (std::size_t a = 0; a < probs.size(); ++a) {
      row[model.alphabet().label(static_cast<Symbol>(a))] = probs[a];
    }
    transitions[ctx] = std::move(row);
  }
  j["transitions"] = std::move(transitions);
  return j;
}

std::vector<std::string> split_context(const std::string& text) {
  std::vector<std::string> parts;
  if (text.empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
}

MarkovModel model_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("model must be a JSON object");
  for (const char* field : {"alphabet", "order", "initial_state", "transitions"}) {
    if (!j.contains(field)) {
      throw ValidationError(std::string("model is missing the field \"") + field + "\"");
    }
  }

  std::vector<std::string> labels;
  for (const json& l : j.at("alphabet")) labels.push_back(l.get<std::string>());
  const Alphabet alphabet(labels);
  require_no_comma(alphabet);

  const int order = j.at("order").get<int>();
  if (order < 0 || order > 32) {
    throw ValidationError("order must lie in [0, 32], got " + std::to_string(order));
  }

  std::vector<Symbol> initial;
  for (const json& l : j.at("initial_state")) initial.push_back(alphabet.symbol(l.get<std::string>()));

  std::map<std::vector<Symbol>, std::vector<double>> rows;
  for (const auto& [ctx_text, row_json] : j.at("transitions").items()) {
    std::vector<Symbol> ctx;
    for (const std::string& label : split_context(ctx_text)) ctx.push_back(alphabet.symbol(label));
    std::vector<double> row(alphabet.size(), 0.0);
    if (!row_json.is_object()) {
      throw ValidationError("row for context \"" + ctx_text + "\" must be a JSON object");
    }
    for (const auto& [label, prob] : row_json.items()) {
      row[alphabet.symbol(label)] = prob.get<double>();
    }
    if (!rows.emplace(std::move(ctx), std::move(row)).second) {
      throw ValidationError("duplicate context \"" + ctx_text + "\"");
    }
  }
  return MarkovModel(alphabet, order, std::move(rows), std::move(initial));
}

json imp_to_json(const ImpModel& model) {
  json j;
  json partition = json::array();
  for (const auto& block : model.partition().blocks()) {
    json labels = json::array();
    for (Symbol s : block) labels.push_back(model.alphabet().label(s));
    partition.push_back(std::move(labels));
  }
  j["partition"] = std::move(partition);
  json components = json::array();
  for (const MarkovModel& c : model.components()) components.push_back(model_to_json(c));
  j["components"] = std::move(components);
  j["switch"] = model_to_json(model.switch_model());
  return j;
}

ImpModel imp_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("model must be a JSON object");
  for (const char* field : {"partition", "components", "switch"}) {
    if (!j.contains(field)) {
      throw ValidationError(std::string("model is missing the field \"") + field + "\"");
    }
  }

  std::vector<std::vector<std::string>> block_labels;
  std::set<std::string> seen;
  for (const json& block : j.at("partition")) {
    std::vector<std::string> labels;
    for (const json& l : block) {
      std::string label = l.get<std::string>();
      if (!seen.insert(label).second) {
        throw ValidationError("label \"" + label + "\" appears in two blocks");
      }
      labels.push_back(std::move(label));
    }
    if (labels.empty()) throw ValidationError("partition blocks must be nonempty");
    block_labels.push_back(std::move(labels));
  }
  if (block_labels.empty()) throw ValidationError("partition must have at least one block");

  // Symbol order is the sorted label order; a file written from an alphabet
  // sorted the same way round-trips exactly.
  std::vector<std::string> sorted_labels(seen.begin(), seen.end());
  const Alphabet alphabet(sorted_labels);

  std::vector<std::vector<Symbol>> blocks_as_written;
  for (const auto& labels : block_labels) {
    std::vector<Symbol> block;
    for (const std::string& label : labels) block.push_back(alphabet.symbol(label));
    blocks_as_written.push_back(std::move(block));
  }
  Partition partition(alphabet.size(), blocks_as_written);
  if (partition.blocks() != blocks_as_written) {
    throw ValidationError(
        "partition blocks must be listed in canonical order: blocks ascending by smallest "
        "label, labels ascending within each block");
  }

  std::vector<MarkovModel> components;
  for (const json& c : j.at("components")) components.push_back(model_from_json(c));
  MarkovModel switch_model = model_from_json(j.at("switch"));
  return ImpModel(alphabet, std::move(partition), std::move(components), std::move(switch_model));
}

json parse_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string model_to_json_text(const MarkovModel& model) { return model_to_json(model).dump(2) + "\n"; }

MarkovModel model_from_json_text(const std::string& text) {
  const json j = parse_text(text, "model JSON");
  try {
    return model_from_json(j);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model JSON: ") + e.what());
  }
}

std::string imp_to_json_text(const ImpModel& model) { return imp_to_json(model).dump(2) + "\n"; }

ImpModel imp_from_json_text(const std::string& text) {
  const json j = parse_text(text, "model JSON");
  try {
    return imp_from_json(j);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model JSON: ") + e.what());
  }
}

bool looks_like_imp_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    return j.is_object() && j.contains("partition");
  } catch (...) {
    return false;
  }
}

std::string sequence_to_text(const Sequence& seq, const Alphabet& alphabet, bool single_char) {
  std::string out;
  if (single_char) {
    for (std::size_t s = 0; s < alphabet.size(); ++s) {
      if (alphabet.label(static_cast<Symbol>(s)).size() != 1) {
        throw ValidationError("single-character mode needs one-character labels, got \"" +
                              alphabet.label(static_cast<Symbol>(s)) + "\"");
      }
    }
    for (Symbol s : seq) out += alphabet.label(s);
    if (!out.empty()) out += '\n';
    return out;
  }
  for (Symbol s : seq) {
    out += alphabet.label(s);
    out += '\n';
  }
  return out;
}

std::pair<Alphabet, Sequence> parse_sequence(const std::string& text, bool single_char) {
  std::vector<std::string> tokens;
  if (single_char) {
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      tokens.emplace_back(1, c);
    }
  } else {
    std::istringstream in(text);
    std::string token;
    while (in >> token) tokens.push_back(token);
  }
  if (tokens.empty()) throw ValidationError("sequence file contains no symbols");

  std::set<std::string> distinct(tokens.begin(), tokens.end());
  const Alphabet alphabet(std::vector<std::string>(distinct.begin(), distinct.end()));
  Sequence seq;
  seq.reserve(tokens.size());
  for (const std::string& token : tokens) seq.push_back(alphabet.symbol(token));
  return {alphabet, std::move(seq)};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error("cannot read file: " + path);
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
  out.flush();
  if (!out.good()) throw Error("cannot write file: " + path);
}

std::string manifest_to_json_text(const RunManifest& manifest) {
  json j;
  j["subcommand"] = manifest.subcommand;
  j["config"] = parse_text(manifest.config_json, "manifest config");
  j["seed"] = manifest.seed;
  j["version"] = manifest.version;
  j["rng"] = manifest.rng_name;
  json inputs = json::object();
  for (const auto& [path, digest] : manifest.input_digests) inputs[path] = digest;
  j["inputs"] = std::move(inputs);
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json_text(const std::string& text) {
  const json j = parse_text(text, "manifest JSON");
  RunManifest m;
  try {
    m.subcommand = j.at("subcommand").get<std::string>();
    m.config_json = j.at("config").dump();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.at("version").get<std::string>();
    m.rng_name = j.at("rng").get<std::string>();
    for (const auto& [path, digest] : j.at("inputs").items()) {
      m.input_digests.emplace_back(path, digest.get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest JSON: ") + e.what());
  }
  return m;
}

}  // namespace impsep
