#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace impsep {

// Symbols are dense indices into an Alphabet's label list.
using Symbol = std::uint32_t;
using Sequence = std::vector<Symbol>;

// Finite ordered alphabet. A symbol's id is its position in the label list;
// that order is fixed at construction and defines the canonical symbol order
// used everywhere (tie-breaking, serialization, sampling).
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> labels);

  // One single-character label per character of `chars`.
  static Alphabet from_chars(std::string_view chars);

  // n <= 26 gives labels "a".."z"; larger alphabets use decimal labels.
  static Alphabet of_size(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(Symbol s) const;
  const std::vector<std::string>& labels() const { return labels_; }

  bool contains(std::string_view label) const;
  Symbol symbol(std::string_view label) const;  // throws UnknownLabelError

  bool operator==(const Alphabet& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, Symbol> index_;
};

}  // namespace impsep
