#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "neardup/corpus.hpp"
#include "neardup/graph.hpp"

namespace neardup {

/// Overlap counts between a predicted and a gold partition of the same
/// documents. Only nonzero cells are stored.
struct ContingencyTable {
  struct Cell {
    std::uint32_t pred;
    std::uint32_t gold;
    std::uint64_t count;
  };
  std::vector<Cell> cells;
  std::vector<std::uint64_t> pred_sizes;  // row sums
  std::vector<std::uint64_t> gold_sizes;  // column sums
  std::uint64_t total = 0;

  /// Throws a data error listing (part of) the symmetric difference when the
  /// two clusterings cover different documents.
  static ContingencyTable build(const Clustering& pred, const Clustering& gold);
};

/// Unordered document pairs classified by whether each partition puts them
/// in the same cluster.
struct PairCounts {
  std::uint64_t true_positive = 0;   // same in both
  std::uint64_t false_positive = 0;  // same in pred only
  std::uint64_t false_negative = 0;  // same in gold only
  std::uint64_t pred_positive = 0;
  std::uint64_t gold_positive = 0;
  std::uint64_t total_pairs = 0;
};

PairCounts pair_counts(const ContingencyTable& t);

/// Hubert-Arabie adjusted Rand index, computed exactly in 128-bit integers.
/// Returns 1.0 when the chance-corrected denominator vanishes, which only
/// happens for identical all-singleton or all-one-cluster partitions.
double adjusted_rand_index(const ContingencyTable& t);
double adjusted_rand_index(const Clustering& pred, const Clustering& gold);

struct PairwisePRF {
  double precision = 1.0;  // 1 when nothing is predicted positive
  double recall = 1.0;     // 1 when gold has no positive pairs
  double f1 = 0.0;         // 0 when precision and recall are both 0
};

PairwisePRF pairwise_prf(const PairCounts& c);
PairwisePRF pairwise_prf(const Clustering& pred, const Clustering& gold);

struct EvalReport {
  double ari = 0.0;
  PairwisePRF pairwise;
  PairCounts pairs;
  ClusterStats predicted;
  ClusterStats gold;
};

EvalReport evaluate(const Clustering& pred, const Clustering& gold);

nlohmann::ordered_json to_json(const ClusterStats& s);
nlohmann::ordered_json to_json(const EvalReport& r);
std::string format_table(const EvalReport& r);

struct TuningPoint {
  double threshold = 0.0;
  double ari = 0.0;
};

struct TuningResult {
  double best_threshold = 0.0;
  double best_ari = 0.0;
  std::vector<TuningPoint> curve;  // one point per grid value, grid order
};

/// Maps a threshold to the clustering a method produces with it. Called
/// concurrently for different thresholds.
using MethodRunner = std::function<Clustering(double threshold)>;

/// Evaluates every grid point and returns the ARI-maximizing threshold; ties
/// go to the smallest threshold.
TuningResult tune_threshold(const MethodRunner& runner, const Clustering& gold, std::span<const double> grid);
TuningResult tune_threshold(const MethodRunner& runner, std::span<const Document> validation,
                            std::span<const double> grid);

/// lo, lo + step, ... up to hi inclusive, each rounded to 1e-9.
std::vector<double> threshold_grid(double lo, double hi, double step);

/// `threshold,ari` CSV with a header row.
void write_curve_csv(std::ostream& out, const TuningResult& r);

}  // namespace neardup
