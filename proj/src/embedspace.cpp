#include "neardup/embedspace.hpp"

#include <algorithm>
#include <tuple>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "binio.hpp"
#include "neardup/error.hpp"
#include "neardup/parallel.hpp"

namespace neardup {

EmbeddingMatrix make_embedding_matrix(std::vector<std::string> ids, std::uint32_t dim, std::vector<float> values,
                                      std::string model_tag, std::size_t* renormalized) {
  if (dim == 0 && !ids.empty()) throw_data("embedding dimension must be positive");
  if (values.size() != ids.size() * static_cast<std::size_t>(dim)) {
    throw_data("embedding matrix has " + std::to_string(values.size()) + " values, expected " +
               std::to_string(ids.size()) + " x " + std::to_string(dim));
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : ids) {
    if (id.empty()) throw_data("embedding row with empty id");
    if (!seen.insert(id).second) throw_data("duplicate embedding id '" + id + "'");
  }
  std::size_t rescaled = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    float* row = values.data() + i * dim;
    double sq = 0.0;
    for (std::uint32_t d = 0; d < dim; ++d) {
      if (!std::isfinite(row[d])) throw_data("non-finite value in embedding row '" + ids[i] + "'");
      sq += static_cast<double>(row[d]) * row[d];
    }
    const double norm = std::sqrt(sq);
    const double err = std::abs(norm - 1.0);
    if (err <= kNormTolerance) continue;
    if (err > kRenormTolerance) {
      throw_data("embedding row '" + ids[i] + "' has norm " + std::to_string(norm) + ", not unit length");
    }
    for (std::uint32_t d = 0; d < dim; ++d) row[d] = static_cast<float>(row[d] / norm);
    ++rescaled;
  }
  if (rescaled > 0) spdlog::warn("renormalized {} embedding rows", rescaled);
  if (renormalized) *renormalized = rescaled;
  return EmbeddingMatrix{std::move(ids), dim, std::move(values), std::move(model_tag)};
}

void write_embeddings(std::ostream& out, const EmbeddingMatrix& m) {
  out.write("EMBD", 4);
  binio::put<std::uint32_t>(out, kEmbeddingFileVersion);
  binio::put<std::uint64_t>(out, m.size());
  binio::put<std::uint32_t>(out, m.dim);
  binio::put_string16(out, m.model_tag);
  for (const auto& id : m.ids) binio::put_string16(out, id);
  for (float v : m.values) binio::put<float>(out, v);
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write embedding file " + path.string());
  write_embeddings(out, m);
  if (!out) throw_data("failed writing embedding file " + path.string());
}

EmbeddingMatrix read_embeddings(std::istream& in, std::size_t* renormalized) {
  binio::expect_magic(in, "EMBD");
  const auto version = binio::get<std::uint32_t>(in, "version");
  if (version != kEmbeddingFileVersion) throw_data("unsupported embedding file version " + std::to_string(version));
  const auto n = binio::get<std::uint64_t>(in, "row count");
  const auto dim = binio::get<std::uint32_t>(in, "dimension");
  std::string tag = binio::get_string16(in, "model tag");
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 24)));
  for (std::uint64_t i = 0; i < n; ++i) ids.push_back(binio::get_string16(in, "row id"));
  std::vector<float> values(static_cast<std::size_t>(n) * dim);
  for (auto& v : values) v = binio::get<float>(in, "embedding values");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw_data("embedding file holds more data than its header declares (" + std::to_string(n) + " x " +
               std::to_string(dim) + ")");
  }
  return make_embedding_matrix(std::move(ids), dim, std::move(values), std::move(tag), renormalized);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, std::size_t* renormalized) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open embedding file " + path.string());
  return read_embeddings(in, renormalized);
}

double dot(std::span<const float> a, std::span<const float> b) noexcept {
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) acc += static_cast<double>(a[d]) * b[d];
  return acc;
}

std::string_view search_mode_name(SearchMode m) noexcept {
  return m == SearchMode::exact_range ? "exact_range" : "knn_then_filter";
}

SearchMode parse_search_mode(std::string_view name) {
  if (name == "exact_range") return SearchMode::exact_range;
  if (name == "knn_then_filter") return SearchMode::knn_then_filter;
  throw_config("unknown search mode '" + std::string(name) + "'");
}

void RangeSearchConfig::validate() const {
  if (!(threshold >= -1.0 && threshold <= 1.0)) throw_config("similarity threshold must lie in [-1, 1]");
  if (mode == SearchMode::knn_then_filter && knn_k < 1) throw_config("knn_k must be >= 1");
}

namespace {

constexpr std::size_t kQueryBlock = 32;
constexpr std::size_t kDocBlock = 512;

// Four dot products against one query; each accumulates in dimension order,
// so every result equals dot(q, d_i) exactly.
inline void dot4(const float* q, const float* d0, const float* d1, const float* d2, const float* d3,
                 std::size_t dim, double out[4]) noexcept {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double x = q[d];
    a0 += x * d0[d];
    a1 += x * d1[d];
    a2 += x * d2[d];
    a3 += x * d3[d];
  }
  out[0] = a0, out[1] = a1, out[2] = a2, out[3] = a3;
}

// Cosine of query i against docs [begin, end), written to scores[j - begin].
void score_row(const EmbeddingMatrix& m, std::size_t i, std::size_t begin, std::size_t end, double* scores) {
  const float* q = m.values.data() + i * m.dim;
  std::size_t j = begin;
  for (; j + 4 <= end; j += 4) {
    const float* base = m.values.data() + j * m.dim;
    dot4(q, base, base + m.dim, base + 2 * m.dim, base + 3 * m.dim, m.dim, scores + (j - begin));
  }
  for (; j < end; ++j) scores[j - begin] = dot(m.row(i), m.row(j));
}

std::vector<Edge> exact_range(const EmbeddingMatrix& m, double cutoff) {
  const std::size_t n = m.size();
  const std::size_t blocks = (n + kQueryBlock - 1) / kQueryBlock;
  std::vector<std::vector<Edge>> found(blocks);
  parallel_for(blocks, [&](std::size_t qb) {
    const std::size_t i0 = qb * kQueryBlock;
    const std::size_t i1 = std::min(n, i0 + kQueryBlock);
    std::vector<double> scores(kDocBlock);
    auto& out = found[qb];
    for (std::size_t j0 = i0; j0 < n; j0 += kDocBlock) {
      const std::size_t j1 = std::min(n, j0 + kDocBlock);
      for (std::size_t i = i0; i < i1; ++i) {
        const std::size_t begin = std::max(j0, i + 1);
        if (begin >= j1) continue;
        score_row(m, i, begin, j1, scores.data());
        for (std::size_t j = begin; j < j1; ++j) {
          const double s = scores[j - begin];
          if (s >= cutoff) out.push_back({static_cast<DocIndex>(i), static_cast<DocIndex>(j), s});
        }
      }
    }
    std::sort(out.begin(), out.end(), [](const Edge& l, const Edge& r) {
      return std::tie(l.a, l.b) < std::tie(r.a, r.b);
    });
  }, 1);
  std::vector<Edge> edges;
  for (auto& v : found) edges.insert(edges.end(), v.begin(), v.end());
  return edges;
}

struct Neighbor {
  double score;
  DocIndex index;
};

inline bool ranks_before(const Neighbor& l, const Neighbor& r) noexcept {
  return l.score > r.score || (l.score == r.score && l.index < r.index);
}

RangeSearchResult knn_then_filter(const EmbeddingMatrix& m, const RangeSearchConfig& cfg, double cutoff) {
  const std::size_t n = m.size();
  std::vector<std::vector<Edge>> found(n);
  std::vector<char> truncated(n, 0);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> scores(n);
    score_row(m, i, 0, n, scores.data());
    std::vector<Neighbor> nbrs;
    nbrs.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) nbrs.push_back({scores[j], static_cast<DocIndex>(j)});
    }
    std::size_t keep = nbrs.size();
    if (nbrs.size() >= cfg.knn_k) {
      keep = cfg.knn_k;
      std::nth_element(nbrs.begin(), nbrs.begin() + static_cast<std::ptrdiff_t>(keep - 1), nbrs.end(),
                       ranks_before);
      if (nbrs[keep - 1].score >= cutoff) truncated[i] = 1;
    }
    auto& out = found[i];
    for (std::size_t t = 0; t < keep; ++t) {
      if (nbrs[t].score < cutoff) continue;
      const auto a = static_cast<DocIndex>(std::min<std::size_t>(i, nbrs[t].index));
      const auto b = static_cast<DocIndex>(std::max<std::size_t>(i, nbrs[t].index));
      out.push_back({a, b, nbrs[t].score});
    }
  }, 4);

  RangeSearchResult result;
  for (auto& v : found) result.edges.insert(result.edges.end(), v.begin(), v.end());
  std::sort(result.edges.begin(), result.edges.end(), [](const Edge& l, const Edge& r) {
    return std::tie(l.a, l.b) < std::tie(r.a, r.b);
  });
  result.edges.erase(std::unique(result.edges.begin(), result.edges.end(),
                                 [](const Edge& l, const Edge& r) { return l.a == r.a && l.b == r.b; }),
                     result.edges.end());
  result.truncation.knn_k = cfg.knn_k;
  result.truncation.threshold = cfg.threshold;
  for (std::size_t i = 0; i < n; ++i) {
    if (truncated[i]) result.truncation.truncated_ids.push_back(m.ids[i]);
  }
  std::sort(result.truncation.truncated_ids.begin(), result.truncation.truncated_ids.end());
  return result;
}

}  // namespace

RangeSearchResult range_search_with_report(const EmbeddingMatrix& m, const RangeSearchConfig& cfg) {
  cfg.validate();
  const double cutoff = cfg.threshold - kThresholdSlack;
  if (cfg.mode == SearchMode::exact_range) return {exact_range(m, cutoff), {}};
  return knn_then_filter(m, cfg, cutoff);
}

TruncationReport knn_truncation_report(const EmbeddingMatrix& m, const RangeSearchConfig& cfg) {
  if (cfg.mode != SearchMode::knn_then_filter) throw_config("truncation report needs knn_then_filter mode");
  return range_search_with_report(m, cfg).truncation;
}

}  // namespace neardup
