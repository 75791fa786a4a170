// neardup: command-line front end for the near-duplicate detection toolkit.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "neardup/corpus.hpp"
#include "neardup/embedspace.hpp"
#include "neardup/error.hpp"
#include "neardup/evalkit.hpp"
#include "neardup/graph.hpp"
#include "neardup/overlap.hpp"
#include "neardup/parallel.hpp"
#include "neardup/pipeline.hpp"
#include "neardup/sketch.hpp"
#include "neardup/synthgen.hpp"

using namespace neardup;

namespace {

struct Globals {
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 0;
  std::string log_level = "warn";
  CLI::Option* seed_opt = nullptr;
};

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw_data("cannot write " + path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_config("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw_config(path + " is not valid JSON: " + e.what());
  }
}

// Flags shared by run, tune and bench. Each one overrides the config file
// only when given on the command line.
struct SpecFlags {
  std::string config;
  std::string method, clustering, metric, normalization, scorer, scores, mode, evaluate;
  int n = 0;
  double threshold = 0, cosine = 0, scorer_threshold = 0, resolution = 0;
  std::uint32_t hashes = 0, min_collisions = 0, bands = 0, rows = 0, min_bands = 0, knn_k = 0;
  std::size_t hot_cap = 0;
  std::uint64_t louvain_seed = 0;
  bool weighted = false;
  std::string corpus, embeddings, clustering_out, report_out, manifest_out, edges_out;
  std::vector<std::pair<CLI::Option*, std::function<void(PipelineSpec&)>>> setters;

  template <typename T>
  void add(CLI::App* app, const std::string& name, T& var, const std::string& help,
           std::function<void(PipelineSpec&)> set) {
    setters.emplace_back(app->add_option(name, var, help), std::move(set));
  }

  void attach(CLI::App* app, bool with_outputs) {
    app->add_option("-c,--config", config, "pipeline config JSON (or a run manifest)");
    add(app, "--method", method, "ngram_overlap | lsh_collision | lsh_banded | embed_cluster | rerank",
        [this](PipelineSpec& s) { s.method = parse_method(method); });
    add(app, "--clustering", clustering, "components | louvain",
        [this](PipelineSpec& s) { s.clustering = parse_cluster_method(clustering); });
    add(app, "-n,--ngram", n, "shingle length in words", [this](PipelineSpec& s) { s.shingle_n = n; });
    add(app, "--normalization", normalization, "default | keep_punctuation",
        [this](PipelineSpec& s) {
          if (normalization != "default" && normalization != "keep_punctuation") {
            throw_config("unknown normalization '" + normalization + "'");
          }
          s.keep_punctuation = normalization == "keep_punctuation";
        });
    add(app, "--hot-key-cap", hot_cap, "skip shingles held by more documents (0 disables)",
        [this](PipelineSpec& s) { s.hot_key_cap = hot_cap; });
    add(app, "--metric", metric, "overlap_min | jaccard", [this](PipelineSpec& s) { s.overlap_metric = parse_metric(metric); });
    add(app, "--threshold", threshold, "n-gram overlap threshold", [this](PipelineSpec& s) { s.overlap_threshold = threshold; });
    add(app, "--hashes", hashes, "hash functions for collision LSH", [this](PipelineSpec& s) { s.num_hashes = hashes; });
    add(app, "--min-collisions", min_collisions, "collision LSH threshold",
        [this](PipelineSpec& s) { s.min_collisions = min_collisions; });
    add(app, "--bands", bands, "LSH bands", [this](PipelineSpec& s) { s.banding.bands = bands; });
    add(app, "--rows", rows, "LSH rows per band", [this](PipelineSpec& s) { s.banding.rows = rows; });
    add(app, "--min-shared-bands", min_bands, "banded LSH threshold", [this](PipelineSpec& s) { s.min_shared_bands = min_bands; });
    add(app, "--cosine", cosine, "cosine threshold for embedding search", [this](PipelineSpec& s) { s.range.threshold = cosine; });
    add(app, "--knn-k", knn_k, "neighbors per query in knn_then_filter mode", [this](PipelineSpec& s) { s.range.knn_k = knn_k; });
    add(app, "--search-mode", mode, "exact_range | knn_then_filter", [this](PipelineSpec& s) { s.range.mode = parse_search_mode(mode); });
    add(app, "--scorer", scorer, "overlap_min | jaccard | external_scores_file",
        [this](PipelineSpec& s) { s.scorer.kind = parse_scorer_kind(scorer); });
    add(app, "--scorer-threshold", scorer_threshold, "re-ranking score threshold",
        [this](PipelineSpec& s) { s.scorer.threshold = scorer_threshold; });
    add(app, "--scores", scores, "edge file with external pair scores", [this](PipelineSpec& s) { s.scorer.scores_path = scores; });
    add(app, "--resolution", resolution, "Louvain resolution", [this](PipelineSpec& s) { s.louvain.resolution = resolution; });
    add(app, "--louvain-seed", louvain_seed, "Louvain node order seed (0 = sorted ids)",
        [this](PipelineSpec& s) { s.louvain.seed = louvain_seed; });
    setters.emplace_back(app->add_flag("--weighted", weighted, "use edge scores as Louvain weights"),
                         [this](PipelineSpec& s) { s.weighted = weighted; });
    add(app, "--evaluate", evaluate, "auto | always | never", [this](PipelineSpec& s) { s.evaluate = parse_eval_mode(evaluate); });
    add(app, "-i,--corpus", corpus, "corpus JSONL", [this](PipelineSpec& s) { s.corpus_path = corpus; });
    add(app, "-e,--embeddings", embeddings, "embedding file", [this](PipelineSpec& s) { s.embeddings_path = embeddings; });
    if (with_outputs) {
      add(app, "-o,--clustering-out", clustering_out, "clustering file to write",
          [this](PipelineSpec& s) { s.clustering_out = clustering_out; });
      add(app, "--report", report_out, "evaluation report JSON to write", [this](PipelineSpec& s) { s.report_out = report_out; });
      add(app, "--manifest", manifest_out, "run manifest JSON to write", [this](PipelineSpec& s) { s.manifest_out = manifest_out; });
      add(app, "--edges-out", edges_out, "edge file to write", [this](PipelineSpec& s) { s.edges_out = edges_out; });
    }
  }

  PipelineSpec build(const Globals& g) const {
    PipelineSpec s = config.empty() ? PipelineSpec{} : load_spec(config);
    for (const auto& [opt, set] : setters) {
      if (opt->count() > 0) set(s);
    }
    if (g.seed_opt->count() > 0) s.seed = g.seed;
    s.validate();
    return s;
  }
};

std::vector<Document> load_checked(const std::string& path, const NormalizationConfig& norm) {
  auto docs = load_corpus(path);
  check_admissible(docs, norm);
  return docs;
}

NormalizationConfig normalization_named(const std::string& name) {
  if (name == "default") return NormalizationConfig::defaults();
  if (name == "keep_punctuation") return NormalizationConfig::keep_punctuation();
  throw_config("unknown normalization '" + name + "'");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Near-duplicate detection for noisy text corpora"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  g.seed_opt = app.add_option("--seed", g.seed, "seed for every hash and random choice");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
  app.add_option("--log-level", g.log_level, "trace | debug | info | warn | error | off");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with gold clusters");
  std::string synth_config, synth_out, synth_manifest, synth_report, synth_preset = "ocr-heavy", synth_prefix;
  std::size_t synth_sources = 0, synth_docs = 0;
  synth->add_option("-c,--config", synth_config, "generator config JSON; an optional \"noise\" member sets the noise model");
  synth->add_option("--preset", synth_preset, "noise preset: none | ocr-light | ocr-heavy");
  auto* sources_opt = synth->add_option("--sources", synth_sources, "number of source articles");
  auto* docs_opt = synth->add_option("--docs", synth_docs, "approximate number of documents");
  auto* prefix_opt = synth->add_option("--id-prefix", synth_prefix, "prefix of document ids");
  synth->add_option("-o,--out", synth_out, "corpus JSONL to write")->required();
  synth->add_option("--manifest", synth_manifest, "manifest JSON to write");
  synth->add_option("--noise-report", synth_report, "noise report JSON to write");
  sources_opt->excludes(docs_opt);

  // shingle
  auto* sh = app.add_subcommand("shingle", "shingle a corpus and report shingle statistics");
  std::string sh_in, sh_out, sh_norm = "default";
  int sh_n = 3;
  std::size_t sh_cap = 10'000;
  bool sh_noise = false;
  sh->add_option("-i,--corpus", sh_in, "corpus JSONL")->required();
  sh->add_option("-n,--ngram", sh_n, "shingle length in words");
  sh->add_option("--normalization", sh_norm, "default | keep_punctuation");
  sh->add_option("--hot-key-cap", sh_cap, "postings length above which a shingle is skipped (0 disables)");
  sh->add_flag("--noise-report", sh_noise, "add N-gram survival statistics over gold duplicate pairs");
  sh->add_option("-o,--out", sh_out, "JSON report to write (stdout if absent)");

  // minhash
  auto* mh = app.add_subcommand("minhash", "write MinHash signatures");
  std::string mh_in, mh_out, mh_norm = "default";
  int mh_n = 3;
  std::uint32_t mh_k = 10;
  mh->add_option("-i,--corpus", mh_in, "corpus JSONL")->required();
  mh->add_option("-n,--ngram", mh_n, "shingle length in words");
  mh->add_option("-k,--hashes", mh_k, "signature length");
  mh->add_option("--normalization", mh_norm, "default | keep_punctuation");
  mh->add_option("-o,--out", mh_out, "signature file to write")->required();

  // pairs
  auto* pr = app.add_subcommand("pairs", "candidate pairs as an edge file");
  std::string pr_in, pr_sigs, pr_out, pr_norm = "default", pr_metric = "overlap_min", pr_lsh = "banded";
  int pr_n = 3;
  double pr_threshold = 0.5;
  std::size_t pr_cap = 10'000;
  std::uint32_t pr_min_coll = 5, pr_bands = 15, pr_rows = 2, pr_min_bands = 1;
  auto* pr_in_opt = pr->add_option("-i,--corpus", pr_in, "corpus JSONL: exact N-gram overlap pairs");
  auto* pr_sig_opt = pr->add_option("-s,--signatures", pr_sigs, "signature file: LSH pairs");
  pr_in_opt->excludes(pr_sig_opt);
  pr->add_option("-n,--ngram", pr_n, "shingle length in words");
  pr->add_option("--normalization", pr_norm, "default | keep_punctuation");
  pr->add_option("--metric", pr_metric, "overlap_min | jaccard");
  pr->add_option("--threshold", pr_threshold, "minimum overlap score");
  pr->add_option("--hot-key-cap", pr_cap, "postings length above which a shingle is skipped (0 disables)");
  pr->add_option("--lsh", pr_lsh, "banded | collision");
  pr->add_option("--min-collisions", pr_min_coll, "collision LSH threshold");
  pr->add_option("--bands", pr_bands, "LSH bands");
  pr->add_option("--rows", pr_rows, "LSH rows per band");
  pr->add_option("--min-shared-bands", pr_min_bands, "banded LSH threshold");
  pr->add_option("-o,--out", pr_out, "edge file to write")->required();

  // embed-search
  auto* es = app.add_subcommand("embed-search", "cosine range search over an embedding file");
  std::string es_in, es_out, es_mode = "exact_range", es_trunc;
  RangeSearchConfig es_cfg;
  es->add_option("-e,--embeddings", es_in, "embedding file")->required();
  es->add_option("--cosine", es_cfg.threshold, "cosine threshold");
  es->add_option("--knn-k", es_cfg.knn_k, "neighbors per query in knn_then_filter mode");
  es->add_option("--search-mode", es_mode, "exact_range | knn_then_filter");
  es->add_option("--truncation-report", es_trunc, "JSON list of documents whose neighborhood was cut");
  es->add_option("-o,--out", es_out, "edge file to write")->required();

  // cluster
  auto* cl = app.add_subcommand("cluster", "cluster an edge file");
  std::string cl_edges, cl_corpus, cl_out, cl_method = "louvain";
  LouvainConfig cl_louvain;
  bool cl_weighted = false;
  cl->add_option("--edges", cl_edges, "edge file")->required();
  cl->add_option("-i,--corpus", cl_corpus, "corpus JSONL providing the node set")->required();
  cl->add_option("--clustering", cl_method, "components | louvain");
  cl->add_option("--resolution", cl_louvain.resolution, "Louvain resolution");
  cl->add_option("--louvain-seed", cl_louvain.seed, "Louvain node order seed (0 = sorted ids)");
  cl->add_flag("--weighted", cl_weighted, "use edge scores as Louvain weights");
  cl->add_option("-o,--out", cl_out, "clustering file to write")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "score a clustering against gold labels");
  std::string ev_pred, ev_gold, ev_gold_clustering, ev_report;
  ev->add_option("-p,--pred", ev_pred, "predicted clustering file")->required();
  auto* ev_gc = ev->add_option("-g,--gold", ev_gold, "corpus JSONL with gold_cluster labels");
  auto* ev_gf = ev->add_option("--gold-clustering", ev_gold_clustering, "gold clustering file");
  ev_gc->excludes(ev_gf);
  ev->add_option("--report", ev_report, "JSON report to write");

  // tune
  auto* tu = app.add_subcommand("tune", "tune a method's threshold on a labeled validation corpus");
  SpecFlags tu_flags;
  tu_flags.attach(tu, false);
  std::string tu_curve, tu_out_config, tu_report;
  std::vector<double> tu_grid;
  tu->add_option("--grid", tu_grid, "explicit grid values (default: the method's standard grid)");
  tu->add_option("--curve", tu_curve, "threshold,ari CSV to write");
  tu->add_option("--out-config", tu_out_config, "config JSON with the tuned value filled in");
  tu->add_option("--report", tu_report, "tuning result JSON to write");

  // run
  auto* rn = app.add_subcommand("run", "run a full pipeline");
  SpecFlags rn_flags;
  rn_flags.attach(rn, true);

  // bench
  auto* bn = app.add_subcommand("bench", "time a pipeline at one or more corpus sizes");
  SpecFlags bn_flags;
  bn_flags.attach(bn, false);
  std::vector<std::size_t> bn_scales;
  std::string bn_out;
  bn->add_option("--scale", bn_scales, "number of documents (repeatable)")->required();
  bn->add_option("--out", bn_out, "JSON report to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("neardup"));
  spdlog::set_level(spdlog::level::from_str(g.log_level));
  set_thread_count(g.threads);

  if (*synth) {
    GeneratorConfig cfg;
    NoiseModel noise = NoiseModel::preset(synth_preset);
    if (!synth_config.empty()) {
      auto j = read_json_file(synth_config);
      if (!j.is_object()) throw_config("generator config must be a JSON object");
      if (j.contains("noise")) {
        noise = noise_model_from_json(j["noise"], noise);
        j.erase("noise");
      }
      cfg = generator_config_from_json(j, cfg);
    }
    if (g.seed_opt->count() > 0) cfg.seed = g.seed;
    if (prefix_opt->count() > 0) cfg.id_prefix = synth_prefix;
    if (sources_opt->count() > 0) cfg.n_sources = synth_sources;
    if (docs_opt->count() > 0) cfg.n_sources = sources_for_documents(cfg, synth_docs);
    const auto docs = generate(cfg, noise);
    save_corpus(synth_out, docs);
    if (!synth_report.empty()) write_json_file(synth_report, to_json(noise_report(docs, NormalizationConfig::defaults())));
    if (!synth_manifest.empty()) {
      nlohmann::ordered_json m;
      m["tool"] = "neardup synth";
      m["version"] = kVersion;
      m["seed"] = cfg.seed;
      m["generator"] = to_json(cfg);
      m["noise"] = to_json(noise);
      m["documents"] = docs.size();
      m["output"] = {{"path", synth_out}, {"xxh64", file_digest(synth_out)}};
      write_json_file(synth_manifest, m);
    }
    std::cerr << "wrote " << docs.size() << " documents from " << cfg.n_sources << " sources to " << synth_out << '\n';
  } else if (*sh) {
    const auto norm = normalization_named(sh_norm);
    const auto docs = load_checked(sh_in, norm);
    const auto sets = shingle_all(docs, sh_n, norm, g.seed);
    const auto index = InvertedIndex::from_shingles(sets, {.hot_key_cap = sh_cap});
    std::size_t empty = 0, total = 0;
    for (const auto& s : sets) {
      total += s.count();
      empty += s.empty() ? 1 : 0;
    }
    nlohmann::ordered_json j;
    j["documents"] = docs.size();
    j["n"] = sh_n;
    j["seed"] = g.seed;
    j["distinct_shingles"] = index.key_count();
    j["mean_shingles_per_document"] = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
    j["documents_without_shingles"] = empty;
    j["hot_key_cap"] = sh_cap;
    j["hot_keys"] = index.hot_key_count();
    if (sh_noise) j["noise_report"] = to_json(noise_report(docs, norm));
    if (sh_out.empty()) {
      std::cout << j.dump(2) << '\n';
    } else {
      write_json_file(sh_out, j);
    }
  } else if (*mh) {
    const auto norm = normalization_named(mh_norm);
    const auto docs = load_checked(mh_in, norm);
    const auto sets = shingle_all(docs, mh_n, norm, g.seed);
    save_signatures(mh_out, minhash_all(sets, mh_k, g.seed));
  } else if (*pr) {
    std::vector<ScoredPair> out;
    if (!pr_in.empty()) {
      const auto norm = normalization_named(pr_norm);
      const auto docs = load_checked(pr_in, norm);
      const auto metric = parse_metric(pr_metric);
      const auto sets = shingle_all(docs, pr_n, norm, g.seed);
      const auto index = InvertedIndex::from_shingles(sets, {.hot_key_cap = pr_cap});
      const auto edges = score_edges(index.candidate_pairs(1), sets, metric, pr_threshold);
      out = to_scored_pairs(edges, doc_ids(docs), metric);
    } else if (!pr_sigs.empty()) {
      const auto sigs = load_signatures(pr_sigs);
      std::vector<std::string> ids;
      for (const auto& s : sigs) ids.push_back(s.doc_id);
      std::vector<Edge> edges;
      if (pr_lsh == "banded") {
        edges = banded_lsh(sigs, {pr_bands, pr_rows}, pr_min_bands);
      } else if (pr_lsh == "collision") {
        edges = collision_lsh(sigs, pr_min_coll);
      } else {
        throw_config("unknown --lsh '" + pr_lsh + "' (expected banded or collision)");
      }
      out = to_scored_pairs(edges, ids, Metric::collisions_fraction);
    } else {
      throw_config("pairs needs --corpus or --signatures");
    }
    save_edges(pr_out, out);
  } else if (*es) {
    es_cfg.mode = parse_search_mode(es_mode);
    const auto emb = load_embeddings(es_in);
    const auto r = range_search_with_report(emb, es_cfg);
    save_edges(es_out, to_scored_pairs(r.edges, emb.ids, Metric::cosine));
    if (!es_trunc.empty()) {
      nlohmann::ordered_json j;
      j["knn_k"] = es_cfg.knn_k;
      j["threshold"] = es_cfg.threshold;
      j["truncated_ids"] = r.truncation.truncated_ids;
      write_json_file(es_trunc, j);
    }
    if (!r.truncation.empty()) {
      std::cerr << r.truncation.count() << " documents may have lost neighbors to the top-" << es_cfg.knn_k << " cut\n";
    }
  } else if (*cl) {
    const auto docs = load_corpus(cl_corpus);
    const auto ids = doc_ids(docs);
    const auto edges = load_edges(cl_edges);
    const auto graph = build_graph(ids, edges, cl_weighted);
    const auto method = parse_cluster_method(cl_method);
    const auto c = method == ClusterMethod::louvain ? louvain(graph, cl_louvain) : connected_components(graph);
    save_clustering(cl_out, c);
  } else if (*ev) {
    const auto pred = load_clustering(ev_pred);
    Clustering gold;
    if (!ev_gold.empty()) {
      const auto docs = load_corpus(ev_gold);
      gold = gold_clustering(docs);
    } else if (!ev_gold_clustering.empty()) {
      gold = load_clustering(ev_gold_clustering);
    } else {
      throw_config("eval needs --gold or --gold-clustering");
    }
    const auto report = evaluate(pred, gold);
    std::cout << format_table(report);
    if (!ev_report.empty()) {
      auto j = to_json(report);
      j["pairwise_metric_kind"] = "pairwise";
      j["inputs"] = {{"pred", ev_pred}, {"gold", ev_gold.empty() ? ev_gold_clustering : ev_gold}};
      j["seed"] = g.seed;
      j["version"] = kVersion;
      write_json_file(ev_report, j);
    }
  } else if (*tu) {
    auto spec = tu_flags.build(g);
    const auto docs = load_checked(spec.corpus_path, spec.normalization());
    std::optional<EmbeddingMatrix> emb;
    if (spec.needs_embeddings()) {
      if (spec.embeddings_path.empty()) throw_data("method needs --embeddings");
      emb = load_embeddings(spec.embeddings_path);
    }
    const auto result = tune(spec, docs, emb ? &*emb : nullptr, tu_grid);
    std::cout << "best " << format_score(result.best_threshold) << " ARI " << format_score(result.best_ari) << '\n';
    if (!tu_curve.empty()) {
      std::ofstream out(tu_curve);
      if (!out) throw_data("cannot write " + tu_curve);
      write_curve_csv(out, result);
    }
    set_tuning_knob(spec, result.best_threshold);
    if (!tu_out_config.empty()) {
      auto cfg = to_json(spec);
      cfg["paths"]["corpus"] = "";
      write_json_file(tu_out_config, cfg);
    }
    if (!tu_report.empty()) {
      nlohmann::ordered_json j;
      j["method"] = method_name(spec.method);
      j["best_threshold"] = result.best_threshold;
      j["best_ari"] = result.best_ari;
      j["curve"] = nlohmann::ordered_json::array();
      for (const auto& p : result.curve) j["curve"].push_back({{"threshold", p.threshold}, {"ari", p.ari}});
      j["spec"] = to_json(spec);
      write_json_file(tu_report, j);
    }
  } else if (*rn) {
    const auto spec = rn_flags.build(g);
    const auto r = run(spec);
    if (r.report) std::cout << format_table(*r.report);
    std::cerr << r.clustering.size() << " documents, " << r.edges.size() << " edges, "
              << cluster_stats(r.clustering).clusters << " clusters\n";
  } else if (*bn) {
    const auto spec = bn_flags.build(g);
    auto j = nlohmann::ordered_json::array();
    for (std::size_t n : bn_scales) {
      const auto b = bench(spec, n);
      auto row = to_json(b);
      row["spec"] = to_json(spec);
      std::cerr << "scale " << n << ": total " << b.total_seconds << " s, peak RSS " << (b.peak_rss_bytes >> 20)
                << " MiB\n";
      j.push_back(row);
    }
    if (bn_out.empty()) {
      std::cout << j.dump(2) << '\n';
    } else {
      write_json_file(bn_out, j);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
