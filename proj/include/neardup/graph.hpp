#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "neardup/corpus.hpp"
#include "neardup/overlap.hpp"

namespace neardup {

/// Every corpus document is a node, isolated ones included. Edges are in
/// node-index space, sorted by (a, b), without self-loops or repeats.
struct SimilarityGraph {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  bool weighted = false;

  std::size_t node_count() const noexcept { return nodes.size(); }
};

/// Repeated edges collapse to one carrying the highest score. Throws a data
/// error naming any endpoint that is not in `doc_ids`.
SimilarityGraph build_graph(std::span<const std::string> doc_ids, std::span<const ScoredPair> edges,
                            bool weighted = false);
SimilarityGraph build_graph(std::vector<std::string> doc_ids, std::vector<Edge> edges, bool weighted = false);

/// Total assignment of documents to clusters.
struct Clustering {
  std::vector<std::string> doc_ids;
  std::vector<std::string> cluster_ids;
  std::string method_tag;

  std::size_t size() const noexcept { return doc_ids.size(); }
};

/// Names each cluster after its lexicographically smallest member.
Clustering clustering_from_labels(std::span<const std::string> doc_ids, std::span<const std::uint32_t> labels,
                                  std::string method_tag);

/// Dense labels 0..c-1 in order of first appearance.
std::vector<std::uint32_t> dense_labels(const Clustering& c);

/// Ground truth from the corpus' gold_cluster fields; throws if any is unset.
Clustering gold_clustering(std::span<const Document> docs);

/// Single linkage: one cluster per connected component.
Clustering connected_components(const SimilarityGraph& g);
std::vector<std::uint32_t> component_labels(const SimilarityGraph& g);

struct LouvainConfig {
  double resolution = 1.0;
  // 0 visits nodes in sorted-id order; any other value visits them in an
  // order shuffled by this seed.
  std::uint64_t seed = 0;
};

/// Louvain modularity optimization run independently on each connected
/// component, with modularity normalized by the whole graph's edge weight.
/// Uses edge scores as weights when g.weighted, unit weights otherwise.
Clustering louvain(const SimilarityGraph& g, const LouvainConfig& cfg = {});
std::vector<std::uint32_t> louvain_labels(const SimilarityGraph& g, const LouvainConfig& cfg = {});

/// Newman modularity of a labeling of g's nodes at the given resolution.
double modularity(const SimilarityGraph& g, std::span<const std::uint32_t> labels, double resolution = 1.0);

struct ClusterStats {
  std::size_t documents = 0;
  std::size_t clusters = 0;
  std::size_t non_singleton_clusters = 0;  // distinct reproduced articles
  std::size_t reproduced_documents = 0;    // documents in non-singleton clusters
  std::size_t singletons = 0;
  std::size_t max_size = 0;
  double mean_size = 0.0;                  // over non-singleton clusters
  bool mean_defined = false;               // false when every cluster is a singleton
};

ClusterStats cluster_stats(const Clustering& c);

// Clustering file: one `doc_id \t cluster_id` line per document, sorted by id.
void write_clustering(std::ostream& out, const Clustering& c);
void save_clustering(const std::filesystem::path& path, const Clustering& c);
Clustering read_clustering(std::istream& in, const std::string& origin = "<stream>");
Clustering load_clustering(const std::filesystem::path& path);

}  // namespace neardup
