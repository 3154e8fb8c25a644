#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "impsep/imp.hpp"
#include "impsep/markov.hpp"

namespace impsep {

// Model files are JSON. A Markov model is
//   {"alphabet": [labels], "order": k, "initial_state": [labels],
//    "transitions": {"a,b": {"a": 0.5, ...}, ...}}
// with contexts as comma-joined labels (the empty string for order 0) and
// omitted labels read as probability zero. Rows whose sums deviate from one
// by more than 1e-9 are rejected; smaller deviations are renormalized.
// An interleaved model is
//   {"partition": [[labels], ...], "components": [model, ...],
//    "switch": model}
// with blocks listed in canonical order (ascending smallest label).
// Parse or validation failures throw ValidationError.
std::string model_to_json_text(const MarkovModel& model);
MarkovModel model_from_json_text(const std::string& text);
std::string imp_to_json_text(const ImpModel& model);
ImpModel imp_from_json_text(const std::string& text);

// Either model file form: a full interleaved model, or a bare Markov model
// read as the switch of an interleaved model whose labels name the blocks.
bool looks_like_imp_json(const std::string& text);

// Sequence text. Token mode holds one label per line; single-character mode
// holds contiguous one-character labels. Parsing accepts any whitespace as a
// separator and infers the alphabet from the distinct labels, sorted.
std::string sequence_to_text(const Sequence& seq, const Alphabet& alphabet, bool single_char);
std::pair<Alphabet, Sequence> parse_sequence(const std::string& text, bool single_char);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Record of one tool invocation: what ran, with which resolved settings and
// seed, over which inputs. Enough to reproduce the outputs byte for byte.
struct RunManifest {
  std::string subcommand;
  std::string config_json;  // resolved settings as a JSON object
  std::uint64_t seed = 0;
  std::string version;
  std::string rng_name;
  std::vector<std::pair<std::string, std::string>> input_digests;  // path, sha256
};

std::string manifest_to_json_text(const RunManifest& manifest);
RunManifest manifest_from_json_text(const std::string& text);

}  // namespace impsep
