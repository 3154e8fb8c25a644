#include "impsep/alphabet.hpp"

#include "impsep/errors.hpp"

namespace impsep {

Alphabet::Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw ValidationError("alphabet must be nonempty");
  index_.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw ValidationError("alphabet label must be nonempty");
    auto [it, inserted] = index_.emplace(labels_[i], static_cast<Symbol>(i));
    if (!inserted) throw ValidationError("duplicate alphabet label: " + labels_[i]);
  }
}

Alphabet Alphabet::from_chars(std::string_view chars) {
  std::vector<std::string> labels;
  labels.reserve(chars.size());
  for (char c : chars) labels.emplace_back(1, c);
  return Alphabet(std::move(labels));
}

Alphabet Alphabet::of_size(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  if (n <= 26) {
    for (std::size_t i = 0; i < n; ++i) labels.emplace_back(1, static_cast<char>('a' + i));
  } else {
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  return Alphabet(std::move(labels));
}

const std::string& Alphabet::label(Symbol s) const {
  if (s >= labels_.size()) throw UnknownSymbolError("symbol id out of range");
  return labels_[s];
}

bool Alphabet::contains(std::string_view label) const {
  return index_.find(std::string(label)) != index_.end();
}

Symbol Alphabet::symbol(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) throw UnknownLabelError("unknown label: " + std::string(label));
  return it->second;
}

}  // namespace impsep
