#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "neardup/corpus.hpp"
#include "neardup/embedspace.hpp"
#include "neardup/evalkit.hpp"
#include "neardup/graph.hpp"
#include "neardup/overlap.hpp"
#include "neardup/sketch.hpp"

namespace neardup {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Method { ngram_overlap, lsh_collision, lsh_banded, embed_cluster, rerank };
enum class ClusterMethod { components, louvain };
enum class ScorerKind { overlap_min, jaccard, external_scores_file };
enum class EvalMode { automatic, always, never };

std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view name);
std::string_view cluster_method_name(ClusterMethod m) noexcept;
ClusterMethod parse_cluster_method(std::string_view name);
std::string_view scorer_kind_name(ScorerKind k) noexcept;
ScorerKind parse_scorer_kind(std::string_view name);
std::string_view eval_mode_name(EvalMode m) noexcept;
EvalMode parse_eval_mode(std::string_view name);

struct PairScorerConfig {
  ScorerKind kind = ScorerKind::overlap_min;
  double threshold = 0.5;
  std::string scores_path;  // edge file, for external_scores_file
};

struct PipelineSpec {
  Method method = Method::lsh_banded;
  ClusterMethod clustering = ClusterMethod::louvain;

  int shingle_n = 3;
  bool keep_punctuation = false;  // normalization preset
  std::size_t hot_key_cap = 10'000;

  Metric overlap_metric = Metric::overlap_min;
  double overlap_threshold = 0.5;

  std::uint32_t num_hashes = 10;
  std::uint32_t min_collisions = 5;

  BandingConfig banding;  // signatures carry bands * rows hashes
  std::uint32_t min_shared_bands = 1;

  RangeSearchConfig range;
  PairScorerConfig scorer;

  LouvainConfig louvain;
  bool weighted = false;

  std::uint64_t seed = kDefaultSeed;
  EvalMode evaluate = EvalMode::automatic;

  std::string corpus_path;
  std::string embeddings_path;
  std::string clustering_out;
  std::string report_out;
  std::string manifest_out;
  std::string edges_out;

  void validate() const;
  NormalizationConfig normalization() const;
  bool needs_embeddings() const noexcept;
};

nlohmann::ordered_json to_json(const PipelineSpec& s);
/// Overlays the fields present in `j` onto `base`; unknown keys are config
/// errors. Accepts a run manifest too, reading its "spec" member.
PipelineSpec spec_from_json(const nlohmann::json& j, PipelineSpec base = {});
PipelineSpec load_spec(const std::filesystem::path& path, PipelineSpec base = {});

/// The knob a method's threshold tuning sweeps: overlap threshold, minimum
/// collisions, minimum shared bands, cosine threshold, or scorer threshold.
double tuning_knob(const PipelineSpec& s);
void set_tuning_knob(PipelineSpec& s, double value);
std::vector<double> default_grid(const PipelineSpec& s);

/// Second-stage scoring of candidate pairs, in corpus index space.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual Metric metric() const noexcept = 0;
  /// Throws a data error when the pair cannot be scored.
  virtual double score(DocIndex a, DocIndex b) const = 0;
};

std::unique_ptr<PairScorer> make_pair_scorer(const PipelineSpec& spec, std::span<const Document> docs);

/// Rows of `m` reordered to follow `ids`; throws a data error naming the
/// first id without a vector. Extra rows are dropped.
EmbeddingMatrix align_embeddings(const EmbeddingMatrix& m, std::span<const std::string> ids);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

/// Scored edges before the method's knob is applied, with enough
/// information to apply any knob value afterwards.
struct CandidateEdges {
  std::vector<Edge> edges;  // index space, sorted
  Metric metric = Metric::overlap_min;
  std::size_t hot_keys = 0;
  TruncationReport truncation;
};

/// Computes candidates at the loosest setting of the method's knob that
/// `knob` allows; pass the spec's own knob for a plain run.
CandidateEdges candidate_edges(const PipelineSpec& spec, std::span<const Document> docs, const EmbeddingMatrix* emb,
                               double knob, std::vector<StageTiming>* timings = nullptr);
/// Edges that survive the knob, per the method's comparison rule.
std::vector<Edge> apply_knob(const PipelineSpec& spec, std::span<const Edge> edges, double knob);
Clustering cluster_edges(const PipelineSpec& spec, std::vector<std::string> ids, std::vector<Edge> edges,
                         std::vector<StageTiming>* timings = nullptr);

struct RunResult {
  Clustering clustering;
  std::optional<EvalReport> report;
  std::vector<ScoredPair> edges;
  std::vector<StageTiming> timings;
  double wall_seconds = 0.0;
  std::size_t hot_keys = 0;
  TruncationReport truncation;
  nlohmann::ordered_json manifest;
};

/// In-memory run over already loaded inputs. `emb` may be null for methods
/// that do not need embeddings.
RunResult run(const PipelineSpec& spec, std::span<const Document> docs, const EmbeddingMatrix* emb);
/// Loads inputs from the spec's paths, runs, and writes every configured
/// output plus the manifest.
RunResult run(const PipelineSpec& spec);

/// Tunes the method's knob on labeled validation documents.
TuningResult tune(const PipelineSpec& spec, std::span<const Document> validation, const EmbeddingMatrix* emb,
                  std::span<const double> grid = {});

struct BenchReport {
  std::size_t scale_n = 0;
  std::size_t documents = 0;
  std::size_t edges = 0;
  bool embeddings_external = false;
  double embed_seconds = 0.0;
  double similarity_seconds = 0.0;
  double graph_seconds = 0.0;
  double community_seconds = 0.0;
  double total_seconds = 0.0;
  std::size_t peak_rss_bytes = 0;
  ClusterStats predicted;
  ClusterStats gold;
  std::optional<double> ari;
  std::vector<StageTiming> stages;
};

/// Times the method on `scale_n` documents: the first scale_n of the spec's
/// corpus if one is set, otherwise a generated "ocr-heavy" corpus.
BenchReport bench(const PipelineSpec& spec, std::size_t scale_n);
nlohmann::ordered_json to_json(const BenchReport& r);

std::size_t peak_rss_bytes();
std::string file_digest(const std::filesystem::path& path);

}  // namespace neardup
