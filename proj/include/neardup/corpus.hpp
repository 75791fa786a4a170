#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neardup/hash.hpp"

namespace neardup {

/// One text unit. `gold_cluster` carries the annotated duplicate cluster when
/// the corpus is labeled.
struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> date;
  std::optional<std::string> source;
  std::optional<std::string> gold_cluster;

  friend bool operator==(const Document&, const Document&) = default;
};

struct CodepointSpan {
  char32_t first;
  char32_t last;
};

/// Text normalization applied before tokenization.
///
/// Per codepoint: case fold, then (when collapsing) treat whitespace as a word
/// separator, otherwise delete it if it is in the strip set. Separator runs
/// become one space and are trimmed at both ends. The transform is idempotent
/// for any strip set.
class NormalizationConfig {
 public:
  bool lowercase = true;
  bool collapse_whitespace = true;

  /// Lowercase + collapse, deleting every Unicode punctuation codepoint
  /// except . , ' " - ?
  static NormalizationConfig defaults();
  /// Lowercase + collapse with an empty strip set.
  static NormalizationConfig keep_punctuation();

  void strip(char32_t cp) { strip_range(cp, cp); }
  void strip_range(char32_t first, char32_t last);
  void keep(char32_t cp);
  bool strips(char32_t cp) const noexcept;
  void clear_strip_set() { strip_.clear(); }

  /// Sorted, merged ranges of stripped codepoints.
  std::span<const CodepointSpan> strip_set() const noexcept { return strip_; }

 private:
  std::vector<CodepointSpan> strip_;
};

std::string normalize(std::string_view text, const NormalizationConfig& cfg);

/// Splits normalized text on Unicode whitespace.
std::vector<std::string_view> split_words(std::string_view normalized);

/// The set of hashed word N-grams of one document, sorted ascending.
struct ShingleSet {
  std::string doc_id;
  int n = 0;
  std::vector<std::uint64_t> shingles;

  std::size_t count() const noexcept { return shingles.size(); }
  bool empty() const noexcept { return shingles.empty(); }
};

/// Hash of one shingle: XXH64 over the words joined by single spaces.
std::uint64_t shingle_hash(std::string_view joined_words, std::uint64_t seed);

ShingleSet shingle(const Document& doc, int n, const NormalizationConfig& cfg,
                   std::uint64_t seed = kDefaultSeed);

/// Shingles every document, in parallel; output order follows `docs`.
std::vector<ShingleSet> shingle_all(std::span<const Document> docs, int n,
                                    const NormalizationConfig& cfg,
                                    std::uint64_t seed = kDefaultSeed);

// JSON Lines corpus I/O. Blank lines are ignored; anything else that is not
// an object with string `id` and `text` is rejected with its line number.
std::vector<Document> read_corpus(std::istream& in, const std::string& origin = "<stream>");
std::vector<Document> load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, std::span<const Document> docs);
void save_corpus(const std::filesystem::path& path, std::span<const Document> docs);

/// Throws a data error naming the first document whose normalized text is
/// empty, or whose id is empty or repeated.
void check_admissible(std::span<const Document> docs, const NormalizationConfig& cfg);

bool has_gold_labels(std::span<const Document> docs) noexcept;

}  // namespace neardup
