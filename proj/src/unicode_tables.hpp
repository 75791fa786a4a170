#pragma once

#include <cstdint>
#include <span>

namespace neardup::unicode {

struct CodepointRange {
  char32_t first;
  char32_t last;
};

struct CaseMapping {
  char32_t from;
  char32_t to;
};

// Sorted, non-overlapping. General category P*.
std::span<const CodepointRange> punctuation_ranges();
// Sorted, non-overlapping. The White_Space property.
std::span<const CodepointRange> whitespace_ranges();
// Sorted by `from`. Only 1:1 mappings whose target lowercases to itself.
std::span<const CaseMapping> lowercase_mappings();

}  // namespace neardup::unicode
