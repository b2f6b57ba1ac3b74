#pragma once

#include <vector>

#include "tsmh/vocab.hpp"

namespace tsmh {

/// One template position: a fixed word (carrying its category) or a category placeholder.
struct Slot {
  bool placeholder = false;
  TokenId word = 0;  // meaningful only for fixed slots
  CategoryId category = kNoCategory;

  static Slot fixed(TokenId w, CategoryId c) { return Slot{false, w, c}; }
  static Slot hole(CategoryId c) { return Slot{true, 0, c}; }

  bool operator==(const Slot& o) const {
    return placeholder == o.placeholder && category == o.category && (placeholder || word == o.word);
  }
};

struct SlotSequenceHash {
  std::size_t operator()(const std::vector<Slot>& slots) const noexcept {
    std::size_t h = slots.size() * 0x9e3779b97f4a7c15ULL;
    for (const Slot& s : slots) {
      const std::size_t v = s.placeholder ? (0x80000000ULL | s.category) : (static_cast<std::size_t>(s.word) << 1);
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

/// Category per position, the only view constraint evaluation needs.
inline std::vector<CategoryId> slot_categories(const std::vector<Slot>& slots) {
  std::vector<CategoryId> out;
  out.reserve(slots.size());
  for (const Slot& s : slots) out.push_back(s.category);
  return out;
}

/// True when x has the template's length, matches every fixed word, and every
/// placeholder position holds a word from the placeholder's category.
inline bool instantiates(const std::vector<Slot>& slots, const Sentence& x, const CategoryPartition& partition) {
  if (slots.size() != x.tokens.size()) return false;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].placeholder) {
      if (partition.category_of_unchecked(x.tokens[i]) != slots[i].category) return false;
    } else if (slots[i].word != x.tokens[i]) {
      return false;
    }
  }
  return true;
}

}  // namespace tsmh
