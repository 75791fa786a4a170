#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "neardup/error.hpp"
#include "neardup/parallel.hpp"
#include "neardup/pipeline.hpp"
#include "neardup/synthgen.hpp"
#include "support/hashing_vectorizer.hpp"
#include "support/oracles.hpp"

using namespace neardup;
namespace oracle = neardup::testing;
namespace fs = std::filesystem;

namespace {

GeneratorConfig corpus_config(std::size_t sources, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.n_sources = sources;
  cfg.seed = seed;
  cfg.min_words = 40;
  cfg.max_words = 120;
  return cfg;
}

std::vector<Document> clean_corpus() {
  static const auto docs = generate(corpus_config(300, 21), NoiseModel::none());
  return docs;
}

std::vector<Document> noisy_corpus() {
  static const auto docs = generate(corpus_config(300, 22), NoiseModel::ocr_heavy());
  return docs;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("neardup-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

Clustering strip_tag(Clustering c) {
  c.method_tag.clear();
  return c;
}

}  // namespace

TEST(pipeline_run, ngram_overlap_on_exact_copies) {
  PipelineSpec spec;
  spec.method = Method::ngram_overlap;
  spec.overlap_threshold = 0.99;
  const auto r = run(spec, clean_corpus(), nullptr);
  ASSERT_TRUE(r.report.has_value());
  EXPECT_DOUBLE_EQ(r.report->ari, 1.0);
}

TEST(pipeline_run, banded_lsh_on_exact_copies) {
  PipelineSpec spec;
  spec.method = Method::lsh_banded;
  for (auto clustering : {ClusterMethod::louvain, ClusterMethod::components}) {
    spec.clustering = clustering;
    const auto r = run(spec, clean_corpus(), nullptr);
    ASSERT_TRUE(r.report.has_value());
    EXPECT_DOUBLE_EQ(r.report->ari, 1.0) << cluster_method_name(clustering);
  }
}

TEST(pipeline_run, timings_cover_wall_time) {
  const auto docs = generate(corpus_config(3000, 23), NoiseModel::ocr_heavy());
  for (Method m : {Method::ngram_overlap, Method::lsh_banded, Method::lsh_collision}) {
    PipelineSpec spec;
    spec.method = m;
    const auto r = run(spec, docs, nullptr);
    double sum = 0;
    for (const auto& t : r.timings) sum += t.seconds;
    EXPECT_LE(sum, r.wall_seconds * 1.0000001);
    EXPECT_GE(sum, 0.95 * r.wall_seconds) << method_name(m);
  }
}

TEST(pipeline_run, unlabeled_corpus_cannot_be_evaluated) {
  auto docs = clean_corpus();
  docs[3].gold_cluster.reset();
  PipelineSpec spec;
  spec.evaluate = EvalMode::always;
  try {
    run(spec, docs, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
  }
  spec.evaluate = EvalMode::automatic;
  EXPECT_FALSE(run(spec, docs, nullptr).report.has_value());
  spec.evaluate = EvalMode::never;
  EXPECT_FALSE(run(spec, clean_corpus(), nullptr).report.has_value());
}

TEST(pipeline_run, embedding_methods_need_vectors) {
  PipelineSpec spec;
  spec.method = Method::embed_cluster;
  EXPECT_THROW(run(spec, clean_corpus(), nullptr), Error);
  spec.method = Method::rerank;
  EXPECT_THROW(run(spec, clean_corpus(), nullptr), Error);

  const auto docs = clean_corpus();
  auto partial = oracle::embed_corpus(std::span(docs).subspan(1));
  spec.method = Method::embed_cluster;
  try {
    run(spec, docs, &partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'" + docs[0].id + "'"), std::string::npos);
  }
}

TEST(pipeline_run, embeddings_are_aligned_by_id) {
  const auto docs = noisy_corpus();
  auto emb = oracle::embed_corpus(docs);
  std::vector<Document> reversed(docs.rbegin(), docs.rend());
  const auto emb_rev = oracle::embed_corpus(reversed);
  PipelineSpec spec;
  spec.method = Method::embed_cluster;
  spec.range.threshold = 0.7;
  const auto a = run(spec, docs, &emb);
  const auto b = run(spec, docs, &emb_rev);
  EXPECT_EQ(a.edges, b.edges);
}

TEST(rerank, vacuous_scorer_equals_embed_cluster) {
  const auto docs = noisy_corpus();
  const auto emb = oracle::embed_corpus(docs);
  PipelineSpec embed;
  embed.method = Method::embed_cluster;
  embed.range.threshold = 0.7;
  PipelineSpec rr = embed;
  rr.method = Method::rerank;
  rr.scorer.threshold = 0.0;
  const auto a = run(embed, docs, &emb);
  const auto b = run(rr, docs, &emb);
  ASSERT_GT(a.edges.size(), 0u);
  std::ostringstream ca, cb;
  write_clustering(ca, a.clustering);
  write_clustering(cb, b.clustering);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(a.edges.size(), b.edges.size());
}

TEST(rerank, overlap_scorer_keeps_exactly_the_qualifying_candidates) {
  const auto docs = noisy_corpus();
  const auto emb = oracle::embed_corpus(docs);
  PipelineSpec spec;
  spec.method = Method::rerank;
  spec.range.threshold = 0.6;
  spec.scorer = {ScorerKind::overlap_min, 0.5, ""};
  const auto r = run(spec, docs, &emb);

  const auto stage1 = oracle::brute_force_range(emb, 0.6);
  const auto norm = spec.normalization();
  std::set<std::pair<std::string, std::string>> want;
  for (const auto& e : stage1) {
    const auto a = oracle::naive_shingles(normalize(docs[e.a].text, norm), spec.shingle_n, spec.seed);
    const auto b = oracle::naive_shingles(normalize(docs[e.b].text, norm), spec.shingle_n, spec.seed);
    std::size_t shared = 0;
    for (auto x : a) shared += b.count(x);
    const auto lo = std::min(a.size(), b.size());
    if (lo > 0 && static_cast<double>(shared) / static_cast<double>(lo) >= 0.5) {
      want.emplace(std::min(docs[e.a].id, docs[e.b].id), std::max(docs[e.a].id, docs[e.b].id));
    }
  }
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& e : r.edges) {
    got.emplace(e.id_a, e.id_b);
    ASSERT_EQ(e.metric, Metric::overlap_min);
  }
  ASSERT_GT(want.size(), 10u);
  ASSERT_LT(want.size(), stage1.size());
  EXPECT_EQ(got, want);
}

TEST(rerank, external_scores) {
  TempDir tmp;
  const auto docs = noisy_corpus();
  const auto emb = oracle::embed_corpus(docs);
  PipelineSpec spec;
  spec.method = Method::rerank;
  spec.range.threshold = 0.6;
  const auto stage1 = to_scored_pairs(oracle::brute_force_range(emb, 0.6), doc_ids(docs), Metric::external);
  ASSERT_GT(stage1.size(), 1u);

  auto zeros = stage1;
  for (auto& e : zeros) e.score = 0.0;
  save_edges(tmp / "zeros.tsv", zeros);
  spec.scorer = {ScorerKind::external_scores_file, 0.5, (tmp / "zeros.tsv").string()};
  const auto r = run(spec, docs, &emb);
  EXPECT_TRUE(r.edges.empty());
  EXPECT_EQ(cluster_stats(r.clustering).non_singleton_clusters, 0u);

  auto ones = stage1;
  for (auto& e : ones) e.score = 1.0;
  save_edges(tmp / "ones.tsv", ones);
  spec.scorer.scores_path = (tmp / "ones.tsv").string();
  EXPECT_EQ(run(spec, docs, &emb).edges.size(), stage1.size());

  auto missing = ones;
  const auto dropped = missing.back();
  missing.pop_back();
  save_edges(tmp / "missing.tsv", missing);
  spec.scorer.scores_path = (tmp / "missing.tsv").string();
  try {
    run(spec, docs, &emb);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_NE(std::string(e.what()).find(dropped.id_a), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(dropped.id_b), std::string::npos);
  }
}

TEST(pipeline_files, manifest_reproduces_the_run) {
  TempDir tmp;
  save_corpus(tmp / "corpus.jsonl", noisy_corpus());
  PipelineSpec spec;
  spec.method = Method::lsh_banded;
  spec.min_shared_bands = 2;
  spec.seed = 99;
  spec.corpus_path = (tmp / "corpus.jsonl").string();
  spec.clustering_out = (tmp / "a.tsv").string();
  spec.report_out = (tmp / "a.json").string();
  spec.edges_out = (tmp / "a.edges").string();
  spec.manifest_out = (tmp / "a.manifest.json").string();
  const auto first = run(spec);

  auto again = load_spec(tmp / "a.manifest.json");
  EXPECT_EQ(again.min_shared_bands, 2u);
  EXPECT_EQ(again.seed, 99u);
  again.clustering_out = (tmp / "b.tsv").string();
  again.report_out = (tmp / "b.json").string();
  again.edges_out = (tmp / "b.edges").string();
  again.manifest_out = (tmp / "b.manifest.json").string();
  run(again);
  EXPECT_EQ(slurp(tmp / "a.tsv"), slurp(tmp / "b.tsv"));
  EXPECT_EQ(slurp(tmp / "a.json"), slurp(tmp / "b.json"));
  EXPECT_EQ(slurp(tmp / "a.edges"), slurp(tmp / "b.edges"));
  EXPECT_FALSE(slurp(tmp / "a.tsv").empty());

  const auto m = nlohmann::json::parse(slurp(tmp / "a.manifest.json"));
  EXPECT_EQ(m["seed"].get<std::uint64_t>(), 99u);
  EXPECT_EQ(m["inputs"][0]["xxh64"].get<std::string>(), file_digest(tmp / "corpus.jsonl"));
  EXPECT_EQ(m["counts"]["documents"].get<std::size_t>(), noisy_corpus().size());
  EXPECT_TRUE(m["stage_timings"].is_array());
  EXPECT_TRUE(m["versions"].contains("compiler"));
  EXPECT_DOUBLE_EQ(m["evaluation"]["ari"].get<double>(), first.report->ari);
}

TEST(pipeline_files, output_independent_of_thread_count) {
  const auto docs = noisy_corpus();
  const auto emb = oracle::embed_corpus(docs);
  for (Method method : {Method::ngram_overlap, Method::lsh_collision, Method::lsh_banded, Method::embed_cluster,
                        Method::rerank}) {
    PipelineSpec spec;
    spec.method = method;
    spec.range.threshold = 0.7;
    spec.louvain.seed = 5;
    set_thread_count(1);
    const auto one = run(spec, docs, &emb);
    set_thread_count(4);
    const auto four = run(spec, docs, &emb);
    set_thread_count(0);
    EXPECT_EQ(one.edges, four.edges) << method_name(method);
    EXPECT_EQ(one.clustering.cluster_ids, four.clustering.cluster_ids) << method_name(method);
  }
}

TEST(pipeline_files, missing_inputs_are_data_errors) {
  TempDir tmp;
  PipelineSpec spec;
  spec.corpus_path = (tmp / "nope.jsonl").string();
  try {
    run(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
  }
  save_corpus(tmp / "c.jsonl", clean_corpus());
  spec.corpus_path = (tmp / "c.jsonl").string();
  spec.method = Method::embed_cluster;
  EXPECT_THROW(run(spec), Error);
}

TEST(pipeline_spec, json_round_trip) {
  PipelineSpec s;
  s.method = Method::rerank;
  s.clustering = ClusterMethod::components;
  s.shingle_n = 5;
  s.keep_punctuation = true;
  s.banding = {10, 3};
  s.range = {0.85, 50, SearchMode::knn_then_filter};
  s.scorer = {ScorerKind::jaccard, 0.3, "x.tsv"};
  s.louvain = {1.5, 3};
  s.weighted = true;
  s.corpus_path = "c.jsonl";
  const auto back = spec_from_json(nlohmann::json::parse(to_json(s).dump()));
  EXPECT_EQ(to_json(back), to_json(s));
}

TEST(pipeline_spec, rejects_unknown_and_invalid_fields) {
  EXPECT_THROW(spec_from_json(nlohmann::json{{"methd", "rerank"}}), Error);
  EXPECT_THROW(spec_from_json(nlohmann::json{{"shingle", {{"size", 3}}}}), Error);
  EXPECT_THROW(spec_from_json(nlohmann::json{{"method", "minhash"}}), Error);
  EXPECT_THROW(spec_from_json(nlohmann::json{{"shingle", {{"n", "three"}}}}), Error);
  PipelineSpec s;
  s.min_shared_bands = 16;
  EXPECT_THROW(s.validate(), Error);
  s = {};
  s.method = Method::rerank;
  s.scorer.kind = ScorerKind::external_scores_file;
  EXPECT_THROW(s.validate(), Error);
  try {
    parse_method("bogus");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    EXPECT_NE(std::string(e.what()).find("lsh_banded"), std::string::npos);
  }
}

TEST(pipeline_spec, knob_per_method) {
  PipelineSpec s;
  s.method = Method::lsh_banded;
  EXPECT_EQ(default_grid(s).size(), 15u);
  set_tuning_knob(s, 3.2);
  EXPECT_EQ(s.min_shared_bands, 4u);
  s.method = Method::ngram_overlap;
  EXPECT_EQ(default_grid(s).size(), 100u);
  set_tuning_knob(s, 0.3);
  EXPECT_EQ(tuning_knob(s), 0.3);
  s.method = Method::embed_cluster;
  EXPECT_EQ(default_grid(s).size(), 39u);
  s.method = Method::lsh_collision;
  EXPECT_EQ(default_grid(s).size(), 10u);
}

TEST(tune, matches_direct_runs_at_each_knob) {
  const auto docs = noisy_corpus();
  for (Method m : {Method::ngram_overlap, Method::lsh_banded}) {
    PipelineSpec spec;
    spec.method = m;
    const std::vector<double> grid = m == Method::ngram_overlap ? std::vector<double>{0.1, 0.3, 0.6}
                                                                 : std::vector<double>{1, 4, 9};
    const auto t = tune(spec, docs, nullptr, grid);
    ASSERT_EQ(t.curve.size(), 3u);
    for (const auto& p : t.curve) {
      auto direct = spec;
      set_tuning_knob(direct, p.threshold);
      EXPECT_DOUBLE_EQ(run(direct, docs, nullptr).report->ari, p.ari) << method_name(m) << " " << p.threshold;
    }
  }
}

TEST(tune, recovers_structure_on_noisy_corpus) {
  PipelineSpec spec;
  spec.method = Method::ngram_overlap;
  const auto t = tune(spec, noisy_corpus(), nullptr);
  EXPECT_GT(t.best_ari, 0.8);
  EXPECT_GT(t.best_threshold, 0.0);
  EXPECT_LT(t.best_threshold, 0.5);
}

TEST(bench, small_scale_reports_every_stage) {
  PipelineSpec spec;
  spec.method = Method::lsh_banded;
  const auto b = bench(spec, 1000);
  EXPECT_GT(b.similarity_seconds, 0.0);
  EXPECT_GT(b.graph_seconds, 0.0);
  EXPECT_GT(b.community_seconds, 0.0);
  EXPECT_GT(b.total_seconds, 0.0);
  EXPECT_GT(b.peak_rss_bytes, 0u);
  ASSERT_TRUE(b.ari.has_value());
  EXPECT_NEAR(static_cast<double>(b.documents), 1000.0, 150.0);
  const auto j = to_json(b);
  EXPECT_EQ(j["embed_articles"], "not used");
}

TEST(bench, doubling_scale_roughly_doubles_time) {
  PipelineSpec spec;
  spec.method = Method::lsh_banded;
  auto best = [&](std::size_t n) {
    double t = 1e300;
    for (int i = 0; i < 2; ++i) t = std::min(t, bench(spec, n).total_seconds);
    return t;
  };
  const double small = best(20'000);
  const double large = best(40'000);
  EXPECT_GE(large / small, 1.5);
  EXPECT_LE(large / small, 3.5);
}
