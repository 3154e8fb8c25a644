#include "impsep/partition.hpp"

#include <algorithm>
#include <cctype>

#include "impsep/errors.hpp"

namespace impsep {

Partition::Partition(std::size_t alphabet_size, std::vector<std::vector<Symbol>> blocks) {
  if (alphabet_size == 0) throw ValidationError("partition needs a nonempty alphabet");
  for (auto& b : blocks) {
    if (b.empty()) throw ValidationError("partition blocks must be nonempty");
    std::sort(b.begin(), b.end());
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  block_of_.assign(alphabet_size, blocks.size());
  local_of_.assign(alphabet_size, 0);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    for (std::size_t j = 0; j < blocks[i].size(); ++j) {
      const Symbol s = blocks[i][j];
      if (s >= alphabet_size) throw UnknownSymbolError("partition symbol out of range");
      if (block_of_[s] != blocks.size()) throw ValidationError("partition blocks overlap");
      block_of_[s] = i;
      local_of_[s] = static_cast<Symbol>(j);
    }
  }
  for (std::size_t s = 0; s < alphabet_size; ++s) {
    if (block_of_[s] == blocks.size()) {
      throw ValidationError("partition does not cover symbol " + std::to_string(s));
    }
  }
  blocks_ = std::move(blocks);
  key_.reserve(block_of_.size() * 2);
  for (std::size_t s = 0; s < block_of_.size(); ++s) {
    const std::size_t b = block_of_[s];
    key_.push_back(static_cast<char>(b & 0xff));
    key_.push_back(static_cast<char>((b >> 8) & 0xff));
  }
}

Partition Partition::single_block(std::size_t alphabet_size) {
  std::vector<Symbol> all(alphabet_size);
  for (std::size_t s = 0; s < alphabet_size; ++s) all[s] = static_cast<Symbol>(s);
  return Partition(alphabet_size, {std::move(all)});
}

Partition Partition::singletons(std::size_t alphabet_size) {
  std::vector<std::vector<Symbol>> blocks(alphabet_size);
  for (std::size_t s = 0; s < alphabet_size; ++s) blocks[s] = {static_cast<Symbol>(s)};
  return Partition(alphabet_size, std::move(blocks));
}

Partition Partition::from_assignment(const std::vector<std::size_t>& block_of_symbol) {
  std::size_t max_id = 0;
  for (std::size_t id : block_of_symbol) max_id = std::max(max_id, id);
  std::vector<std::vector<Symbol>> blocks(max_id + 1);
  for (std::size_t s = 0; s < block_of_symbol.size(); ++s) {
    blocks[block_of_symbol[s]].push_back(static_cast<Symbol>(s));
  }
  blocks.erase(std::remove_if(blocks.begin(), blocks.end(),
                              [](const auto& b) { return b.empty(); }),
               blocks.end());
  return Partition(block_of_symbol.size(), std::move(blocks));
}

std::size_t Partition::block_of(Symbol s) const {
  if (s >= block_of_.size()) throw UnknownSymbolError("symbol out of range for partition");
  return block_of_[s];
}

Symbol Partition::local_of(Symbol s) const {
  if (s >= local_of_.size()) throw UnknownSymbolError("symbol out of range for partition");
  return local_of_[s];
}

bool Partition::refines(const Partition& coarser) const {
  if (alphabet_size() != coarser.alphabet_size()) return false;
  for (const auto& b : blocks_) {
    const std::size_t target = coarser.block_of(b.front());
    for (Symbol s : b) {
      if (coarser.block_of(s) != target) return false;
    }
  }
  return true;
}

bool partition_lex_less(const Partition& a, const Partition& b) {
  return a.blocks() < b.blocks();
}

std::string block_display_label(const Alphabet& alphabet, const Partition& partition,
                                std::size_t block) {
  std::string label = alphabet.label(partition.block(block).front());
  for (char& c : label) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return label;
}

}  // namespace impsep
