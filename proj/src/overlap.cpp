#include "neardup/overlap.hpp"

#include <algorithm>
#include <tuple>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <spdlog/spdlog.h>

#include "neardup/error.hpp"
#include "neardup/parallel.hpp"

namespace neardup {

std::string_view metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::overlap_min: return "overlap_min";
    case Metric::jaccard: return "jaccard";
    case Metric::cosine: return "cosine";
    case Metric::collisions_fraction: return "collisions_fraction";
    case Metric::external: return "external";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  for (Metric m : {Metric::overlap_min, Metric::jaccard, Metric::cosine, Metric::collisions_fraction,
                   Metric::external}) {
    if (metric_name(m) == name) return m;
  }
  throw_config("unknown metric '" + std::string(name) + "'");
}

std::size_t intersection_size(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) noexcept {
  std::size_t shared = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared, ++ia, ++ib;
    }
  }
  return shared;
}

double score_from_counts(Metric metric, std::size_t shared, std::size_t size_a, std::size_t size_b) {
  switch (metric) {
    case Metric::overlap_min: {
      const std::size_t smaller = std::min(size_a, size_b);
      return smaller == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(smaller);
    }
    case Metric::jaccard: {
      const std::size_t uni = size_a + size_b - shared;
      return uni == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(uni);
    }
    default:
      throw_config("metric '" + std::string(metric_name(metric)) + "' is not a set metric");
  }
}

double overlap_min(const ShingleSet& a, const ShingleSet& b) noexcept {
  const std::size_t smaller = std::min(a.count(), b.count());
  if (smaller == 0) return 0.0;
  return static_cast<double>(intersection_size(a.shingles, b.shingles)) / static_cast<double>(smaller);
}

double jaccard(const ShingleSet& a, const ShingleSet& b) noexcept {
  const std::size_t shared = intersection_size(a.shingles, b.shingles);
  const std::size_t uni = a.count() + b.count() - shared;
  return uni == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(uni);
}

InvertedIndex InvertedIndex::from_shingles(std::span<const ShingleSet> sets, Options opts) {
  std::size_t total = 0;
  for (const auto& s : sets) total += s.count();
  std::vector<std::pair<IndexKey, DocIndex>> entries;
  entries.reserve(total);
  for (std::size_t d = 0; d < sets.size(); ++d) {
    for (std::uint64_t h : sets[d].shingles) entries.push_back({{0, h}, static_cast<DocIndex>(d)});
  }
  InvertedIndex index;
  index.build(std::move(entries), sets.size(), opts);
  return index;
}

InvertedIndex InvertedIndex::from_keys(const std::vector<std::vector<IndexKey>>& keys, Options opts) {
  std::size_t total = 0;
  for (const auto& k : keys) total += k.size();
  std::vector<std::pair<IndexKey, DocIndex>> entries;
  entries.reserve(total);
  for (std::size_t d = 0; d < keys.size(); ++d) {
    for (const IndexKey& k : keys[d]) entries.push_back({k, static_cast<DocIndex>(d)});
  }
  InvertedIndex index;
  index.build(std::move(entries), keys.size(), opts);
  return index;
}

void InvertedIndex::build(std::vector<std::pair<IndexKey, DocIndex>> entries, std::size_t docs,
                          Options opts) {
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

  std::vector<std::size_t> per_doc(docs, 0);
  post_offsets_.assign(1, 0);
  post_docs_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i == 0 || entries[i].first != entries[i - 1].first) {
      if (i != 0) post_offsets_.push_back(post_docs_.size());
      keys_.push_back(entries[i].first);
    }
    post_docs_.push_back(entries[i].second);
    ++per_doc[entries[i].second];
  }
  if (!entries.empty()) post_offsets_.push_back(post_docs_.size());

  hot_.assign(keys_.size(), false);
  for (std::size_t k = 0; k < keys_.size(); ++k) {
    if (opts.hot_key_cap != 0 && post_offsets_[k + 1] - post_offsets_[k] > opts.hot_key_cap) {
      hot_[k] = true;
      ++hot_count_;
    }
  }
  if (hot_count_ > 0) {
    spdlog::warn("inverted index: skipping {} hot keys with postings longer than {}", hot_count_,
                 opts.hot_key_cap);
  }

  doc_offsets_.assign(docs + 1, 0);
  for (std::size_t d = 0; d < docs; ++d) doc_offsets_[d + 1] = doc_offsets_[d] + per_doc[d];
  doc_keys_.resize(doc_offsets_.back());
  std::vector<std::size_t> cursor(doc_offsets_.begin(), doc_offsets_.end() - 1);
  for (std::size_t k = 0; k < keys_.size(); ++k) {
    for (std::size_t p = post_offsets_[k]; p < post_offsets_[k + 1]; ++p) {
      doc_keys_[cursor[post_docs_[p]]++] = static_cast<std::uint32_t>(k);
    }
  }
}

std::span<const DocIndex> InvertedIndex::postings(IndexKey key) const {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return {};
  const auto k = static_cast<std::size_t>(it - keys_.begin());
  return {post_docs_.data() + post_offsets_[k], post_offsets_[k + 1] - post_offsets_[k]};
}

std::vector<IndexKey> InvertedIndex::hot_keys() const {
  std::vector<IndexKey> out;
  for (std::size_t k = 0; k < keys_.size(); ++k) {
    if (hot_[k]) out.push_back(keys_[k]);
  }
  return out;
}

std::vector<CandidatePair> InvertedIndex::candidate_pairs(std::uint32_t min_shared) const {
  if (min_shared < 1) throw_config("min_shared must be >= 1");
  const std::size_t docs = doc_count();
  std::vector<std::vector<CandidatePair>> per_doc(docs);

  parallel_for(docs, [&](std::size_t a) {
    thread_local std::vector<std::uint32_t> counts;
    thread_local std::vector<DocIndex> touched;
    if (counts.size() < docs) counts.resize(docs, 0);
    touched.clear();

    for (std::size_t i = doc_offsets_[a]; i < doc_offsets_[a + 1]; ++i) {
      const std::uint32_t k = doc_keys_[i];
      if (hot_[k]) continue;
      const auto* first = post_docs_.data() + post_offsets_[k];
      const auto* last = post_docs_.data() + post_offsets_[k + 1];
      for (const auto* p = std::upper_bound(first, last, static_cast<DocIndex>(a)); p != last; ++p) {
        if (counts[*p]++ == 0) touched.push_back(*p);
      }
    }
    std::sort(touched.begin(), touched.end());
    auto& out = per_doc[a];
    for (DocIndex b : touched) {
      if (counts[b] >= min_shared) {
        std::uint32_t shared = counts[b];
        if (hot_count_ > 0) {
          // Hot keys were skipped while counting; recount exactly.
          shared = 0;
          auto ia = doc_keys_.begin() + static_cast<std::ptrdiff_t>(doc_offsets_[a]);
          auto ea = doc_keys_.begin() + static_cast<std::ptrdiff_t>(doc_offsets_[a + 1]);
          auto ib = doc_keys_.begin() + static_cast<std::ptrdiff_t>(doc_offsets_[b]);
          auto eb = doc_keys_.begin() + static_cast<std::ptrdiff_t>(doc_offsets_[b + 1]);
          while (ia != ea && ib != eb) {
            if (*ia < *ib) {
              ++ia;
            } else if (*ib < *ia) {
              ++ib;
            } else {
              ++shared, ++ia, ++ib;
            }
          }
        }
        out.push_back({static_cast<DocIndex>(a), b, shared});
      }
      counts[b] = 0;
    }
  }, 16);

  std::size_t total = 0;
  for (const auto& v : per_doc) total += v.size();
  std::vector<CandidatePair> pairs;
  pairs.reserve(total);
  for (auto& v : per_doc) {
    pairs.insert(pairs.end(), v.begin(), v.end());
    std::vector<CandidatePair>().swap(v);
  }
  return pairs;
}

std::vector<Edge> score_edges(std::span<const CandidatePair> pairs, std::span<const ShingleSet> sets,
                              Metric metric, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw_config("threshold must lie in [0, 1]");
  if (metric != Metric::overlap_min && metric != Metric::jaccard) {
    throw_config("score_edges supports overlap_min and jaccard only");
  }
  std::vector<Edge> edges;
  for (const auto& p : pairs) {
    const double s = score_from_counts(metric, p.shared, sets[p.a].count(), sets[p.b].count());
    if (s >= threshold) edges.push_back({p.a, p.b, s});
  }
  return edges;
}

std::vector<ScoredPair> to_scored_pairs(std::span<const Edge> edges, std::span<const std::string> ids,
                                        Metric metric) {
  std::vector<ScoredPair> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    const auto& x = ids[e.a];
    const auto& y = ids[e.b];
    // Float rounding can push a cosine a hair past 1.
    const double score = std::clamp(e.score, 0.0, 1.0);
    if (x < y) {
      out.push_back({x, y, score, metric});
    } else {
      out.push_back({y, x, score, metric});
    }
  }
  std::sort(out.begin(), out.end(), [](const ScoredPair& l, const ScoredPair& r) {
    return std::tie(l.id_a, l.id_b) < std::tie(r.id_a, r.id_b);
  });
  return out;
}

std::vector<std::string> doc_ids(std::span<const Document> docs) {
  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const auto& d : docs) ids.push_back(d.id);
  return ids;
}

std::string format_score(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_edges(std::ostream& out, std::span<const ScoredPair> edges) {
  std::vector<const ScoredPair*> sorted;
  sorted.reserve(edges.size());
  for (const auto& e : edges) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const ScoredPair* l, const ScoredPair* r) {
    return std::tie(l->id_a, l->id_b) < std::tie(r->id_a, r->id_b);
  });
  for (const auto* e : sorted) {
    out << e->id_a << '\t' << e->id_b << '\t' << format_score(e->score) << '\t' << metric_name(e->metric)
        << '\n';
  }
}

void save_edges(const std::filesystem::path& path, std::span<const ScoredPair> edges) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write edge file " + path.string());
  write_edges(out, edges);
}

std::vector<ScoredPair> read_edges(std::istream& in, const std::string& origin) {
  std::vector<ScoredPair> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto tab = rest.find('\t');
      fields.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (fields.size() != 4) throw_data(where + ": expected 4 tab-separated fields");
    ScoredPair e;
    e.id_a = fields[0];
    e.id_b = fields[1];
    if (e.id_a.empty() || e.id_b.empty()) throw_data(where + ": empty document id");
    if (e.id_a == e.id_b) throw_data(where + ": self-loop on '" + e.id_a + "'");
    const auto* end = fields[2].data() + fields[2].size();
    auto [ptr, ec] = std::from_chars(fields[2].data(), end, e.score);
    if (ec != std::errc() || ptr != end) throw_data(where + ": bad score '" + std::string(fields[2]) + "'");
    try {
      e.metric = parse_metric(fields[3]);
    } catch (const Error&) {
      throw_data(where + ": unknown metric '" + std::string(fields[3]) + "'");
    }
    if (e.id_b < e.id_a) std::swap(e.id_a, e.id_b);
    edges.push_back(std::move(e));
  }
  return edges;
}

std::vector<ScoredPair> load_edges(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open edge file " + path.string());
  return read_edges(in, path.string());
}

}  // namespace neardup
