#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neardup/corpus.hpp"

namespace neardup {

/// Position of a document in the corpus being processed.
using DocIndex = std::uint32_t;

enum class Metric { overlap_min, jaccard, cosine, collisions_fraction, external };

std::string_view metric_name(Metric m) noexcept;
Metric parse_metric(std::string_view name);

/// Scored edge in document-index space; always a < b.
struct Edge {
  DocIndex a = 0;
  DocIndex b = 0;
  double score = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Scored edge in document-id space; always id_a < id_b.
struct ScoredPair {
  std::string id_a;
  std::string id_b;
  double score = 0.0;
  Metric metric = Metric::overlap_min;

  friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

struct CandidatePair {
  DocIndex a = 0;
  DocIndex b = 0;
  std::uint32_t shared = 0;

  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

std::size_t intersection_size(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) noexcept;

/// |A ∩ B| / min(|A|, |B|); 0 when either set is empty.
double overlap_min(const ShingleSet& a, const ShingleSet& b) noexcept;
/// |A ∩ B| / |A ∪ B|; 0 when both sets are empty.
double jaccard(const ShingleSet& a, const ShingleSet& b) noexcept;

/// Score of a pair from its shared count and the two set sizes.
double score_from_counts(Metric metric, std::size_t shared, std::size_t size_a, std::size_t size_b);

/// Key of an inverted index entry. Shingle indices use slot 0; sketch indices
/// use the hash-function or band number as the slot.
struct IndexKey {
  std::uint32_t slot = 0;
  std::uint64_t value = 0;

  friend auto operator<=>(const IndexKey&, const IndexKey&) = default;
};

/// Postings from key to the sorted ids of documents holding it.
class InvertedIndex {
 public:
  struct Options {
    // Keys whose postings list is longer than this are left out of pair
    // generation. 0 disables the cap.
    std::size_t hot_key_cap = 10'000;
  };

  static InvertedIndex from_shingles(std::span<const ShingleSet> sets, Options opts);
  static InvertedIndex from_shingles(std::span<const ShingleSet> sets) {
    return from_shingles(sets, Options{});
  }
  /// `keys[d]` lists the keys of document d; duplicates are ignored.
  static InvertedIndex from_keys(const std::vector<std::vector<IndexKey>>& keys, Options opts);

  std::size_t doc_count() const noexcept { return doc_offsets_.size() - 1; }
  std::size_t key_count() const noexcept { return keys_.size(); }
  std::size_t posting_count() const noexcept { return post_docs_.size(); }

  std::span<const DocIndex> postings(IndexKey key) const;
  std::size_t doc_key_count(DocIndex d) const noexcept {
    return doc_offsets_[d + 1] - doc_offsets_[d];
  }

  /// Keys skipped by the hot-key cap.
  std::size_t hot_key_count() const noexcept { return hot_count_; }
  std::vector<IndexKey> hot_keys() const;

  /// Every pair of documents sharing at least `min_shared` non-hot keys,
  /// each exactly once, sorted by (a, b). `shared` is the exact number of
  /// keys the two documents have in common, hot keys included.
  std::vector<CandidatePair> candidate_pairs(std::uint32_t min_shared) const;

 private:
  InvertedIndex() = default;
  void build(std::vector<std::pair<IndexKey, DocIndex>> entries, std::size_t docs, Options opts);

  std::vector<IndexKey> keys_;
  std::vector<std::size_t> post_offsets_;
  std::vector<DocIndex> post_docs_;
  std::vector<bool> hot_;
  std::size_t hot_count_ = 0;
  // Per document: sorted ids into keys_.
  std::vector<std::size_t> doc_offsets_{0};
  std::vector<std::uint32_t> doc_keys_;
};

inline std::vector<CandidatePair> candidate_pairs(const InvertedIndex& index, std::uint32_t min_shared) {
  return index.candidate_pairs(min_shared);
}

/// Keeps pairs whose metric score is >= threshold (ties kept). Only
/// overlap_min and jaccard are defined over shingle sets.
std::vector<Edge> score_edges(std::span<const CandidatePair> pairs, std::span<const ShingleSet> sets,
                              Metric metric, double threshold);

/// Converts index-space edges into id-space pairs sorted by (id_a, id_b).
std::vector<ScoredPair> to_scored_pairs(std::span<const Edge> edges, std::span<const std::string> ids,
                                        Metric metric);

std::vector<std::string> doc_ids(std::span<const Document> docs);

/// Shortest decimal form of `v` that reads back to the same double.
std::string format_score(double v);

// Edge file: one `id_a \t id_b \t score \t metric` line per edge, sorted.
void write_edges(std::ostream& out, std::span<const ScoredPair> edges);
void save_edges(const std::filesystem::path& path, std::span<const ScoredPair> edges);
std::vector<ScoredPair> read_edges(std::istream& in, const std::string& origin = "<stream>");
std::vector<ScoredPair> load_edges(const std::filesystem::path& path);

}  // namespace neardup
