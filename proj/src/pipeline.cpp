#include "neardup/pipeline.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "neardup/error.hpp"
#include "neardup/hash.hpp"
#include "neardup/parallel.hpp"
#include "neardup/synthgen.hpp"

namespace neardup {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

template <typename Fn>
auto timed(std::vector<StageTiming>* timings, const char* stage, Fn&& fn) {
  const auto start = Clock::now();
  if constexpr (std::is_void_v<decltype(fn())>) {
    fn();
    if (timings) timings->push_back({stage, seconds_since(start)});
  } else {
    auto out = fn();
    if (timings) timings->push_back({stage, seconds_since(start)});
    return out;
  }
}

template <typename E, std::size_t N>
E parse_enum(std::string_view name, const std::array<E, N>& all, std::string_view (*to_name)(E) noexcept,
             const char* what) {
  for (E e : all) {
    if (to_name(e) == name) return e;
  }
  std::string expected;
  for (E e : all) {
    if (!expected.empty()) expected += ", ";
    expected += to_name(e);
  }
  throw_config("unknown " + std::string(what) + " '" + std::string(name) + "' (expected one of " + expected + ")");
}

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

std::uint32_t knob_count(double knob) {
  if (!(knob >= 1.0)) return 1;
  return static_cast<std::uint32_t>(std::ceil(knob - 1e-9));
}

// Recovers the integer count behind a score stored as count / total.
std::uint32_t count_from_score(double score, std::uint32_t total) {
  return static_cast<std::uint32_t>(std::llround(score * total));
}

Metric edge_metric(const PipelineSpec& spec) {
  switch (spec.method) {
    case Method::ngram_overlap: return spec.overlap_metric;
    case Method::lsh_collision:
    case Method::lsh_banded: return Metric::collisions_fraction;
    case Method::embed_cluster: return Metric::cosine;
    case Method::rerank:
      switch (spec.scorer.kind) {
        case ScorerKind::overlap_min: return Metric::overlap_min;
        case ScorerKind::jaccard: return Metric::jaccard;
        case ScorerKind::external_scores_file: return Metric::external;
      }
  }
  return Metric::external;
}

class ShingleScorer final : public PairScorer {
 public:
  ShingleScorer(Metric metric, std::vector<ShingleSet> sets) : metric_(metric), sets_(std::move(sets)) {}
  Metric metric() const noexcept override { return metric_; }
  double score(DocIndex a, DocIndex b) const override {
    return metric_ == Metric::jaccard ? jaccard(sets_[a], sets_[b]) : overlap_min(sets_[a], sets_[b]);
  }

 private:
  Metric metric_;
  std::vector<ShingleSet> sets_;
};

class ExternalScorer final : public PairScorer {
 public:
  ExternalScorer(const std::string& path, std::vector<std::string> ids) : ids_(std::move(ids)) {
    for (auto& p : load_edges(path)) scores_[p.id_a + '\t' + p.id_b] = p.score;
  }
  Metric metric() const noexcept override { return Metric::external; }
  double score(DocIndex a, DocIndex b) const override {
    const auto& x = std::min(ids_[a], ids_[b]);
    const auto& y = std::max(ids_[a], ids_[b]);
    const auto it = scores_.find(x + '\t' + y);
    if (it == scores_.end()) throw_data("external scores have no entry for candidate pair (" + x + ", " + y + ")");
    return it->second;
  }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, double> scores_;
};

nlohmann::ordered_json timings_json(const std::vector<StageTiming>& timings) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& t : timings) arr.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  return arr;
}

std::vector<Document> load_admissible_corpus(const PipelineSpec& spec) {
  if (spec.corpus_path.empty()) throw_config("no corpus path given");
  auto docs = load_corpus(spec.corpus_path);
  check_admissible(docs, spec.normalization());
  return docs;
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw_config(std::string("config field '") + key + "' has the wrong type");
  }
}

const nlohmann::json& section(const nlohmann::json& j, const char* key, std::initializer_list<std::string_view> known) {
  static const nlohmann::json empty = nlohmann::json::object();
  const auto it = j.find(key);
  if (it == j.end()) return empty;
  if (!it->is_object()) throw_config(std::string("config section '") + key + "' must be an object");
  for (const auto& [k, _] : it->items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw_config(std::string("unknown config field '") + key + "." + k + "'");
    }
  }
  return *it;
}

}  // namespace

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::ngram_overlap: return "ngram_overlap";
    case Method::lsh_collision: return "lsh_collision";
    case Method::lsh_banded: return "lsh_banded";
    case Method::embed_cluster: return "embed_cluster";
    case Method::rerank: return "rerank";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  static constexpr std::array all = {Method::ngram_overlap, Method::lsh_collision, Method::lsh_banded,
                                     Method::embed_cluster, Method::rerank};
  return parse_enum(name, all, method_name, "method");
}

std::string_view cluster_method_name(ClusterMethod m) noexcept {
  return m == ClusterMethod::components ? "components" : "louvain";
}

ClusterMethod parse_cluster_method(std::string_view name) {
  static constexpr std::array all = {ClusterMethod::components, ClusterMethod::louvain};
  return parse_enum(name, all, cluster_method_name, "clustering");
}

std::string_view scorer_kind_name(ScorerKind k) noexcept {
  switch (k) {
    case ScorerKind::overlap_min: return "overlap_min";
    case ScorerKind::jaccard: return "jaccard";
    case ScorerKind::external_scores_file: return "external_scores_file";
  }
  return "unknown";
}

ScorerKind parse_scorer_kind(std::string_view name) {
  static constexpr std::array all = {ScorerKind::overlap_min, ScorerKind::jaccard, ScorerKind::external_scores_file};
  return parse_enum(name, all, scorer_kind_name, "scorer");
}

std::string_view eval_mode_name(EvalMode m) noexcept {
  switch (m) {
    case EvalMode::automatic: return "auto";
    case EvalMode::always: return "always";
    case EvalMode::never: return "never";
  }
  return "unknown";
}

EvalMode parse_eval_mode(std::string_view name) {
  static constexpr std::array all = {EvalMode::automatic, EvalMode::always, EvalMode::never};
  return parse_enum(name, all, eval_mode_name, "evaluation mode");
}

void PipelineSpec::validate() const {
  if (shingle_n < 1) throw_config("shingle n must be >= 1");
  if (overlap_metric != Metric::overlap_min && overlap_metric != Metric::jaccard) {
    throw_config("overlap metric must be overlap_min or jaccard");
  }
  if (!(overlap_threshold >= 0.0 && overlap_threshold <= 1.0)) throw_config("overlap threshold must be in [0, 1]");
  if (num_hashes < 1) throw_config("num_hashes must be >= 1");
  if (min_collisions < 1 || min_collisions > num_hashes) throw_config("min_collisions must be in [1, num_hashes]");
  banding.validate(banding.bands * banding.rows);
  if (min_shared_bands < 1 || min_shared_bands > banding.bands) {
    throw_config("min_shared_bands must be in [1, bands]");
  }
  range.validate();
  if (!(scorer.threshold >= 0.0 && scorer.threshold <= 1.0)) throw_config("scorer threshold must be in [0, 1]");
  if (method == Method::rerank && scorer.kind == ScorerKind::external_scores_file && scorer.scores_path.empty()) {
    throw_config("external_scores_file scorer needs a scores path");
  }
  if (!(louvain.resolution > 0.0)) throw_config("louvain resolution must be > 0");
}

NormalizationConfig PipelineSpec::normalization() const {
  return keep_punctuation ? NormalizationConfig::keep_punctuation() : NormalizationConfig::defaults();
}

bool PipelineSpec::needs_embeddings() const noexcept {
  return method == Method::embed_cluster || method == Method::rerank;
}

nlohmann::ordered_json to_json(const PipelineSpec& s) {
  nlohmann::ordered_json j;
  j["method"] = method_name(s.method);
  j["clustering"] = cluster_method_name(s.clustering);
  j["seed"] = s.seed;
  j["evaluate"] = eval_mode_name(s.evaluate);
  j["shingle"] = {{"n", s.shingle_n},
                  {"normalization", s.keep_punctuation ? "keep_punctuation" : "default"},
                  {"hot_key_cap", s.hot_key_cap}};
  j["ngram_overlap"] = {{"metric", metric_name(s.overlap_metric)}, {"threshold", s.overlap_threshold}};
  j["lsh_collision"] = {{"num_hashes", s.num_hashes}, {"min_collisions", s.min_collisions}};
  j["lsh_banded"] = {{"bands", s.banding.bands}, {"rows", s.banding.rows}, {"min_shared_bands", s.min_shared_bands}};
  j["embed"] = {{"threshold", s.range.threshold},
                {"knn_k", s.range.knn_k},
                {"mode", search_mode_name(s.range.mode)}};
  j["scorer"] = {{"kind", scorer_kind_name(s.scorer.kind)},
                 {"threshold", s.scorer.threshold},
                 {"scores_path", s.scorer.scores_path}};
  j["louvain"] = {{"resolution", s.louvain.resolution}, {"seed", s.louvain.seed}, {"weighted", s.weighted}};
  j["paths"] = {{"corpus", s.corpus_path},       {"embeddings", s.embeddings_path},
                {"clustering_out", s.clustering_out}, {"report_out", s.report_out},
                {"manifest_out", s.manifest_out}, {"edges_out", s.edges_out}};
  return j;
}

PipelineSpec spec_from_json(const nlohmann::json& in, PipelineSpec s) {
  if (!in.is_object()) throw_config("pipeline config must be a JSON object");
  const nlohmann::json& j = in.contains("spec") && in.contains("stage_timings") ? in["spec"] : in;
  static constexpr std::array<std::string_view, 12> top = {
      "method", "clustering",   "seed",  "evaluate", "shingle", "ngram_overlap",
      "lsh_collision", "lsh_banded", "embed", "scorer",   "louvain", "paths"};
  for (const auto& [k, _] : j.items()) {
    if (std::find(top.begin(), top.end(), k) == top.end()) throw_config("unknown config field '" + k + "'");
  }
  std::string name;
  auto read_enum = [&](const nlohmann::json& sec, const char* key, auto parse, auto& out) {
    if (!sec.contains(key)) return;
    read_field(sec, key, name);
    out = parse(name);
  };
  read_enum(j, "method", parse_method, s.method);
  read_enum(j, "clustering", parse_cluster_method, s.clustering);
  read_enum(j, "evaluate", parse_eval_mode, s.evaluate);
  read_field(j, "seed", s.seed);

  const auto& sh = section(j, "shingle", {"n", "normalization", "hot_key_cap"});
  read_field(sh, "n", s.shingle_n);
  read_field(sh, "hot_key_cap", s.hot_key_cap);
  if (sh.contains("normalization")) {
    read_field(sh, "normalization", name);
    if (name != "default" && name != "keep_punctuation") {
      throw_config("unknown normalization '" + name + "' (expected default or keep_punctuation)");
    }
    s.keep_punctuation = name == "keep_punctuation";
  }
  const auto& ng = section(j, "ngram_overlap", {"metric", "threshold"});
  read_enum(ng, "metric", parse_metric, s.overlap_metric);
  read_field(ng, "threshold", s.overlap_threshold);
  const auto& lc = section(j, "lsh_collision", {"num_hashes", "min_collisions"});
  read_field(lc, "num_hashes", s.num_hashes);
  read_field(lc, "min_collisions", s.min_collisions);
  const auto& lb = section(j, "lsh_banded", {"bands", "rows", "min_shared_bands"});
  read_field(lb, "bands", s.banding.bands);
  read_field(lb, "rows", s.banding.rows);
  read_field(lb, "min_shared_bands", s.min_shared_bands);
  const auto& em = section(j, "embed", {"threshold", "knn_k", "mode"});
  read_field(em, "threshold", s.range.threshold);
  read_field(em, "knn_k", s.range.knn_k);
  read_enum(em, "mode", parse_search_mode, s.range.mode);
  const auto& sc = section(j, "scorer", {"kind", "threshold", "scores_path"});
  read_enum(sc, "kind", parse_scorer_kind, s.scorer.kind);
  read_field(sc, "threshold", s.scorer.threshold);
  read_field(sc, "scores_path", s.scorer.scores_path);
  const auto& lv = section(j, "louvain", {"resolution", "seed", "weighted"});
  read_field(lv, "resolution", s.louvain.resolution);
  read_field(lv, "seed", s.louvain.seed);
  read_field(lv, "weighted", s.weighted);
  const auto& pa =
      section(j, "paths", {"corpus", "embeddings", "clustering_out", "report_out", "manifest_out", "edges_out"});
  read_field(pa, "corpus", s.corpus_path);
  read_field(pa, "embeddings", s.embeddings_path);
  read_field(pa, "clustering_out", s.clustering_out);
  read_field(pa, "report_out", s.report_out);
  read_field(pa, "manifest_out", s.manifest_out);
  read_field(pa, "edges_out", s.edges_out);
  return s;
}

PipelineSpec load_spec(const std::filesystem::path& path, PipelineSpec base) {
  std::ifstream in(path);
  if (!in) throw_config("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw_config("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return spec_from_json(j, std::move(base));
}

double tuning_knob(const PipelineSpec& s) {
  switch (s.method) {
    case Method::ngram_overlap: return s.overlap_threshold;
    case Method::lsh_collision: return s.min_collisions;
    case Method::lsh_banded: return s.min_shared_bands;
    case Method::embed_cluster: return s.range.threshold;
    case Method::rerank: return s.scorer.threshold;
  }
  return 0.0;
}

void set_tuning_knob(PipelineSpec& s, double value) {
  switch (s.method) {
    case Method::ngram_overlap: s.overlap_threshold = value; break;
    case Method::lsh_collision: s.min_collisions = knob_count(value); break;
    case Method::lsh_banded: s.min_shared_bands = knob_count(value); break;
    case Method::embed_cluster: s.range.threshold = value; break;
    case Method::rerank: s.scorer.threshold = value; break;
  }
}

std::vector<double> default_grid(const PipelineSpec& s) {
  switch (s.method) {
    case Method::ngram_overlap: return threshold_grid(0.01, 1.0, 0.01);
    case Method::lsh_collision: return threshold_grid(1.0, s.num_hashes, 1.0);
    case Method::lsh_banded: return threshold_grid(1.0, s.banding.bands, 1.0);
    case Method::embed_cluster: return threshold_grid(0.8, 0.99, 0.005);
    case Method::rerank: return threshold_grid(0.0, 1.0, 0.01);
  }
  return {};
}

std::unique_ptr<PairScorer> make_pair_scorer(const PipelineSpec& spec, std::span<const Document> docs) {
  switch (spec.scorer.kind) {
    case ScorerKind::overlap_min:
    case ScorerKind::jaccard:
      return std::make_unique<ShingleScorer>(
          spec.scorer.kind == ScorerKind::jaccard ? Metric::jaccard : Metric::overlap_min,
          shingle_all(docs, spec.shingle_n, spec.normalization(), spec.seed));
    case ScorerKind::external_scores_file:
      return std::make_unique<ExternalScorer>(spec.scorer.scores_path, doc_ids(docs));
  }
  throw_internal("unhandled scorer kind");
}

EmbeddingMatrix align_embeddings(const EmbeddingMatrix& m, std::span<const std::string> ids) {
  std::unordered_map<std::string_view, std::size_t> row_of;
  row_of.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) row_of.emplace(m.ids[i], i);
  EmbeddingMatrix out;
  out.dim = m.dim;
  out.model_tag = m.model_tag;
  out.ids.assign(ids.begin(), ids.end());
  out.values.resize(ids.size() * static_cast<std::size_t>(m.dim));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = row_of.find(ids[i]);
    if (it == row_of.end()) throw_data("no embedding for document '" + ids[i] + "'");
    const auto row = m.row(it->second);
    std::copy(row.begin(), row.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * m.dim));
  }
  if (m.size() > ids.size()) spdlog::info("ignoring {} embeddings of documents not in the corpus", m.size() - ids.size());
  return out;
}

CandidateEdges candidate_edges(const PipelineSpec& spec, std::span<const Document> docs, const EmbeddingMatrix* emb,
                               double knob, std::vector<StageTiming>* timings) {
  spec.validate();
  CandidateEdges out;
  out.metric = edge_metric(spec);
  const auto norm = spec.normalization();
  if (spec.needs_embeddings() && !emb) throw_data("method " + std::string(method_name(spec.method)) + " needs embeddings");

  switch (spec.method) {
    case Method::ngram_overlap: {
      const auto sets = timed(timings, "shingle", [&] { return shingle_all(docs, spec.shingle_n, norm, spec.seed); });
      auto pairs = timed(timings, "candidates", [&] {
        const auto index = InvertedIndex::from_shingles(sets, {.hot_key_cap = spec.hot_key_cap});
        out.hot_keys = index.hot_key_count();
        return index.candidate_pairs(1);
      });
      out.edges = timed(timings, "score", [&] { return score_edges(pairs, sets, spec.overlap_metric, knob); });
      break;
    }
    case Method::lsh_collision:
    case Method::lsh_banded: {
      const bool banded = spec.method == Method::lsh_banded;
      const std::uint32_t k = banded ? spec.banding.bands * spec.banding.rows : spec.num_hashes;
      auto sets = timed(timings, "shingle", [&] { return shingle_all(docs, spec.shingle_n, norm, spec.seed); });
      const auto sigs = timed(timings, "sign", [&] {
        auto s = minhash_all(sets, k, spec.seed);
        std::vector<ShingleSet>().swap(sets);
        return s;
      });
      out.edges = timed(timings, "bucket", [&] {
        return banded ? banded_lsh(sigs, spec.banding, knob_count(knob)) : collision_lsh(sigs, knob_count(knob));
      });
      break;
    }
    case Method::embed_cluster:
    case Method::rerank: {
      auto cfg = spec.range;
      if (spec.method == Method::embed_cluster) cfg.threshold = knob;
      auto result = timed(timings, "range_search", [&] { return range_search_with_report(*emb, cfg); });
      out.truncation = std::move(result.truncation);
      if (!out.truncation.empty()) {
        spdlog::warn("{} documents may have more than {} neighbors above {}; their neighborhoods were cut",
                     out.truncation.count(), cfg.knn_k, cfg.threshold);
      }
      if (spec.method == Method::embed_cluster) {
        out.edges = std::move(result.edges);
        break;
      }
      out.edges = timed(timings, "rerank_score", [&] {
        const auto scorer = make_pair_scorer(spec, docs);
        std::vector<Edge> scored(result.edges.size());
        parallel_for(result.edges.size(), [&](std::size_t i) {
          const auto& e = result.edges[i];
          scored[i] = {e.a, e.b, scorer->score(e.a, e.b)};
        }, 256);
        std::erase_if(scored, [&](const Edge& e) { return e.score < knob; });
        return scored;
      });
      break;
    }
  }
  return out;
}

std::vector<Edge> apply_knob(const PipelineSpec& spec, std::span<const Edge> edges, double knob) {
  std::vector<Edge> out;
  auto keep = [&](const Edge& e) {
    switch (spec.method) {
      case Method::ngram_overlap:
      case Method::rerank: return e.score >= knob;
      case Method::lsh_collision: return count_from_score(e.score, spec.num_hashes) >= knob_count(knob);
      case Method::lsh_banded: return count_from_score(e.score, spec.banding.bands) >= knob_count(knob);
      case Method::embed_cluster: return e.score >= knob - kThresholdSlack;
    }
    return false;
  };
  std::copy_if(edges.begin(), edges.end(), std::back_inserter(out), keep);
  return out;
}

Clustering cluster_edges(const PipelineSpec& spec, std::vector<std::string> ids, std::vector<Edge> edges,
                         std::vector<StageTiming>* timings) {
  const auto g = timed(timings, "graph", [&] { return build_graph(std::move(ids), std::move(edges), spec.weighted); });
  return timed(timings, "cluster", [&] {
    return spec.clustering == ClusterMethod::louvain ? louvain(g, spec.louvain) : connected_components(g);
  });
}

RunResult run(const PipelineSpec& spec, std::span<const Document> docs, const EmbeddingMatrix* emb) {
  spec.validate();
  const auto start = Clock::now();
  RunResult r;
  const bool labeled = has_gold_labels(docs);
  if (spec.evaluate == EvalMode::always && !labeled) {
    throw_data("evaluation requested but the corpus lacks gold_cluster labels");
  }
  std::optional<EmbeddingMatrix> aligned;
  if (spec.needs_embeddings()) {
    if (!emb) throw_data("method " + std::string(method_name(spec.method)) + " needs an embeddings file");
    aligned = timed(&r.timings, "align_embeddings", [&] { return align_embeddings(*emb, doc_ids(docs)); });
  }
  auto cand = candidate_edges(spec, docs, aligned ? &*aligned : nullptr, tuning_knob(spec), &r.timings);
  r.hot_keys = cand.hot_keys;
  r.truncation = std::move(cand.truncation);
  auto ids = doc_ids(docs);
  r.edges = timed(&r.timings, "edge_ids", [&] { return to_scored_pairs(cand.edges, ids, cand.metric); });
  r.clustering = cluster_edges(spec, std::move(ids), std::move(cand.edges), &r.timings);
  if (labeled && spec.evaluate != EvalMode::never) {
    r.report = timed(&r.timings, "evaluate", [&] { return evaluate(r.clustering, gold_clustering(docs)); });
  }
  r.wall_seconds = seconds_since(start);
  return r;
}

namespace {

nlohmann::ordered_json make_manifest(const PipelineSpec& spec, const RunResult& r,
                                     const std::vector<std::pair<std::string, std::string>>& inputs) {
  nlohmann::ordered_json m;
  m["tool"] = "neardup";
  m["version"] = kVersion;
  m["versions"] = {{"compiler", __VERSION__},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                   {"spdlog", std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) + "." +
                                  std::to_string(SPDLOG_VER_PATCH)}};
  m["seed"] = spec.seed;
  m["threads"] = thread_count();
  m["spec"] = to_json(spec);
  m["inputs"] = nlohmann::ordered_json::array();
  for (const auto& [path, digest] : inputs) m["inputs"].push_back({{"path", path}, {"xxh64", digest}});
  m["counts"] = {{"documents", r.clustering.size()},
                 {"edges", r.edges.size()},
                 {"clusters", cluster_stats(r.clustering).clusters},
                 {"hot_keys_skipped", r.hot_keys},
                 {"knn_truncated_documents", r.truncation.count()}};
  m["evaluation"] = r.report ? to_json(*r.report) : nlohmann::ordered_json(nullptr);
  m["stage_timings"] = timings_json(r.timings);
  m["wall_seconds"] = r.wall_seconds;
  return m;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write " + path);
  out << text;
  if (!out) throw_data("failed writing " + path);
}

}  // namespace

RunResult run(const PipelineSpec& spec) {
  spec.validate();
  const auto start = Clock::now();
  std::vector<StageTiming> io;
  std::vector<std::pair<std::string, std::string>> inputs;
  const auto docs = timed(&io, "load_corpus", [&] {
    auto d = load_admissible_corpus(spec);
    inputs.emplace_back(spec.corpus_path, file_digest(spec.corpus_path));
    return d;
  });
  std::optional<EmbeddingMatrix> emb;
  if (spec.needs_embeddings()) {
    if (spec.embeddings_path.empty()) throw_data("method " + std::string(method_name(spec.method)) + " needs an embeddings file");
    emb = timed(&io, "load_embeddings", [&] {
      inputs.emplace_back(spec.embeddings_path, file_digest(spec.embeddings_path));
      return load_embeddings(spec.embeddings_path);
    });
  }
  if (spec.method == Method::rerank && spec.scorer.kind == ScorerKind::external_scores_file) {
    inputs.emplace_back(spec.scorer.scores_path, file_digest(spec.scorer.scores_path));
  }
  auto r = run(spec, docs, emb ? &*emb : nullptr);
  r.timings.insert(r.timings.begin(), io.begin(), io.end());
  timed(&r.timings, "write_outputs", [&] {
    if (!spec.clustering_out.empty()) save_clustering(spec.clustering_out, r.clustering);
    if (!spec.edges_out.empty()) save_edges(spec.edges_out, r.edges);
    if (!spec.report_out.empty() && r.report) write_text(spec.report_out, to_json(*r.report).dump(2) + "\n");
  });
  r.wall_seconds = seconds_since(start);
  r.manifest = make_manifest(spec, r, inputs);
  if (!spec.manifest_out.empty()) write_text(spec.manifest_out, r.manifest.dump(2) + "\n");
  return r;
}

TuningResult tune(const PipelineSpec& spec, std::span<const Document> validation, const EmbeddingMatrix* emb,
                  std::span<const double> grid) {
  spec.validate();
  if (!has_gold_labels(validation)) throw_data("validation corpus lacks gold_cluster labels");
  const std::vector<double> fallback = grid.empty() ? default_grid(spec) : std::vector<double>{};
  if (grid.empty()) grid = fallback;
  if (grid.empty()) throw_config("tuning grid is empty");

  std::optional<EmbeddingMatrix> aligned;
  if (spec.needs_embeddings()) {
    if (!emb) throw_data("method " + std::string(method_name(spec.method)) + " needs embeddings");
    aligned = align_embeddings(*emb, doc_ids(validation));
  }
  // Candidates once, at the loosest knob in the grid.
  const double loosest = *std::min_element(grid.begin(), grid.end());
  const auto cand = candidate_edges(spec, validation, aligned ? &*aligned : nullptr, loosest);
  const auto ids = doc_ids(validation);
  const auto gold = gold_clustering(validation);
  MethodRunner runner = [&](double knob) { return cluster_edges(spec, ids, apply_knob(spec, cand.edges, knob)); };
  return tune_threshold(runner, gold, grid);
}

BenchReport bench(const PipelineSpec& spec, std::size_t scale_n) {
  spec.validate();
  if (scale_n == 0) throw_config("bench scale must be >= 1");
  std::vector<Document> docs;
  if (!spec.corpus_path.empty()) {
    docs = load_admissible_corpus(spec);
    if (docs.size() < scale_n) {
      throw_data("corpus has " + std::to_string(docs.size()) + " documents, fewer than the requested " +
                 std::to_string(scale_n));
    }
    docs.resize(scale_n);
  } else {
    GeneratorConfig g;
    g.seed = spec.seed;
    g.n_sources = sources_for_documents(g, scale_n);
    docs = generate(g, NoiseModel::ocr_heavy());
  }
  std::optional<EmbeddingMatrix> emb;
  if (spec.needs_embeddings()) {
    if (spec.embeddings_path.empty()) throw_data("bench of an embedding method needs an embeddings file");
    emb = load_embeddings(spec.embeddings_path);
  }

  PipelineSpec quiet = spec;
  quiet.evaluate = EvalMode::never;
  const auto r = run(quiet, docs, emb ? &*emb : nullptr);

  BenchReport b;
  b.scale_n = scale_n;
  b.documents = docs.size();
  b.edges = r.edges.size();
  b.embeddings_external = spec.needs_embeddings();
  b.stages = r.timings;
  for (const auto& t : r.timings) {
    if (t.stage == "graph") {
      b.graph_seconds += t.seconds;
    } else if (t.stage == "cluster") {
      b.community_seconds += t.seconds;
    } else if (t.stage == "align_embeddings") {
      b.embed_seconds += t.seconds;
    } else if (t.stage != "evaluate") {
      b.similarity_seconds += t.seconds;
    }
  }
  b.total_seconds = r.wall_seconds;
  b.peak_rss_bytes = peak_rss_bytes();
  b.predicted = cluster_stats(r.clustering);
  if (has_gold_labels(docs)) {
    const auto gold = gold_clustering(docs);
    b.gold = cluster_stats(gold);
    b.ari = adjusted_rand_index(r.clustering, gold);
  }
  return b;
}

nlohmann::ordered_json to_json(const BenchReport& r) {
  nlohmann::ordered_json j;
  j["scale_n"] = r.scale_n;
  j["documents"] = r.documents;
  j["edges"] = r.edges;
  if (r.embeddings_external) {
    j["embed_articles"] = "external";
  } else {
    j["embed_articles"] = "not used";
  }
  j["compute_similarity_seconds"] = r.similarity_seconds;
  j["build_graph_seconds"] = r.graph_seconds;
  j["community_detection_seconds"] = r.community_seconds;
  j["total_seconds"] = r.total_seconds;
  j["peak_rss_bytes"] = r.peak_rss_bytes;
  j["predicted"] = to_json(r.predicted);
  j["gold"] = to_json(r.gold);
  j["ari"] = r.ari ? nlohmann::ordered_json(*r.ari) : nlohmann::ordered_json(nullptr);
  j["stage_timings"] = timings_json(r.stages);
  return j;
}

std::size_t peak_rss_bytes() {
  rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
  return static_cast<std::size_t>(usage.ru_maxrss) * 1024;  // kilobytes on Linux
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return hex64(xxh64(buf.str(), 0));
}

}  // namespace neardup
