#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "impsep/alphabet.hpp"

namespace impsep {

// Partition of the symbols 0..alphabet_size-1 into nonempty blocks, kept in
// canonical form: each block sorted ascending, blocks ordered by smallest
// element. Canonical form makes equality, hashing and lexicographic
// tie-breaking well defined.
class Partition {
 public:
  Partition(std::size_t alphabet_size, std::vector<std::vector<Symbol>> blocks);

  static Partition single_block(std::size_t alphabet_size);
  static Partition singletons(std::size_t alphabet_size);
  // block_of_symbol[s] = arbitrary block id for symbol s; ids are compacted.
  static Partition from_assignment(const std::vector<std::size_t>& block_of_symbol);

  std::size_t alphabet_size() const { return block_of_.size(); }
  std::size_t block_count() const { return blocks_.size(); }
  const std::vector<std::vector<Symbol>>& blocks() const { return blocks_; }
  const std::vector<Symbol>& block(std::size_t i) const { return blocks_.at(i); }
  std::size_t block_of(Symbol s) const;
  // Position of s inside its own block.
  Symbol local_of(Symbol s) const;

  // Canonical byte encoding (block index per symbol); usable as a map key.
  const std::string& key() const { return key_; }

  bool operator==(const Partition& other) const { return key_ == other.key_; }
  bool operator!=(const Partition& other) const { return key_ != other.key_; }

  // true when `refined` splits every block of this partition (equality
  // allowed blockwise).
  bool refines(const Partition& coarser) const;

 private:
  std::vector<std::vector<Symbol>> blocks_;
  std::vector<std::size_t> block_of_;
  std::vector<Symbol> local_of_;
  std::string key_;
};

// Lexicographic order on canonical block lists; used only to break exact
// cost ties deterministically.
bool partition_lex_less(const Partition& a, const Partition& b);

// Display label of a block: the uppercased label of its smallest symbol.
std::string block_display_label(const Alphabet& alphabet, const Partition& partition,
                                std::size_t block);

}  // namespace impsep
