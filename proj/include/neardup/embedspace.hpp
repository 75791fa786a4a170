#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "neardup/overlap.hpp"

namespace neardup {

/// n x dim float32 row-major matrix of unit vectors keyed by document id.
struct EmbeddingMatrix {
  std::vector<std::string> ids;
  std::uint32_t dim = 0;
  std::vector<float> values;
  std::string model_tag;

  std::size_t size() const noexcept { return ids.size(); }
  std::span<const float> row(std::size_t i) const noexcept {
    return {values.data() + i * dim, dim};
  }
};

// Rows within kNormTolerance of unit length are kept as is, rows within
// kRenormTolerance are rescaled, anything else is rejected.
inline constexpr double kNormTolerance = 1e-3;
inline constexpr double kRenormTolerance = 1e-2;

/// Validates ids and values and renormalizes rows per the tolerances above.
/// Returns the number of renormalized rows through `renormalized`.
EmbeddingMatrix make_embedding_matrix(std::vector<std::string> ids, std::uint32_t dim, std::vector<float> values,
                                      std::string model_tag, std::size_t* renormalized = nullptr);

// Embedding file, little-endian: "EMBD", version u32, n u64, d u32, tag
// length u16, tag bytes, n x (id length u16, id bytes), n x d float32.
inline constexpr std::uint32_t kEmbeddingFileVersion = 1;
void write_embeddings(std::ostream& out, const EmbeddingMatrix& m);
void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m);
EmbeddingMatrix read_embeddings(std::istream& in, std::size_t* renormalized = nullptr);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, std::size_t* renormalized = nullptr);

/// Dot product accumulated in double, strictly in dimension order.
double dot(std::span<const float> a, std::span<const float> b) noexcept;

enum class SearchMode { exact_range, knn_then_filter };

std::string_view search_mode_name(SearchMode m) noexcept;
SearchMode parse_search_mode(std::string_view name);

struct RangeSearchConfig {
  double threshold = 0.92;   // cosine similarity lower bound
  std::uint32_t knn_k = 900;
  SearchMode mode = SearchMode::exact_range;

  void validate() const;
};

/// Pairs within this distance below the threshold still count as clearing it.
inline constexpr double kThresholdSlack = 1e-6;

/// Documents whose knn_k-th neighbor still clears the threshold, i.e. whose
/// range neighborhood may have been cut by the top-k search.
struct TruncationReport {
  std::uint32_t knn_k = 0;
  double threshold = 0.0;
  std::vector<std::string> truncated_ids;

  std::size_t count() const noexcept { return truncated_ids.size(); }
  bool empty() const noexcept { return truncated_ids.empty(); }
};

struct RangeSearchResult {
  std::vector<Edge> edges;      // sorted by (a, b), score = cosine
  TruncationReport truncation;  // only filled for knn_then_filter
};

RangeSearchResult range_search_with_report(const EmbeddingMatrix& m, const RangeSearchConfig& cfg);

inline std::vector<Edge> range_search(const EmbeddingMatrix& m, const RangeSearchConfig& cfg) {
  return range_search_with_report(m, cfg).edges;
}

TruncationReport knn_truncation_report(const EmbeddingMatrix& m, const RangeSearchConfig& cfg);

}  // namespace neardup
