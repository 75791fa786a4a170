#include "neardup/evalkit.hpp"

#include <algorithm>
#include <tuple>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "neardup/error.hpp"
#include "neardup/overlap.hpp"
#include "neardup/parallel.hpp"

namespace neardup {

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

constexpr u128 choose2(std::uint64_t n) noexcept {
  return n < 2 ? 0 : static_cast<u128>(n) * (n - 1) / 2;
}

std::uint32_t intern(std::unordered_map<std::string_view, std::uint32_t>& ids, std::string_view key) {
  return ids.emplace(key, static_cast<std::uint32_t>(ids.size())).first->second;
}

}  // namespace

ContingencyTable ContingencyTable::build(const Clustering& pred, const Clustering& gold) {
  std::unordered_map<std::string_view, std::size_t> gold_pos;
  gold_pos.reserve(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold_pos.emplace(gold.doc_ids[i], i).second) {
      throw_data("document '" + gold.doc_ids[i] + "' appears twice in the gold clustering");
    }
  }

  std::vector<std::string> only_pred;
  std::vector<char> matched(gold.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    auto it = gold_pos.find(pred.doc_ids[i]);
    if (it == gold_pos.end()) {
      only_pred.push_back(pred.doc_ids[i]);
      continue;
    }
    if (matched[it->second]) throw_data("document '" + pred.doc_ids[i] + "' appears twice in the prediction");
    matched[it->second] = 1;
    pairs.emplace_back(i, it->second);
  }
  std::vector<std::string> only_gold;
  for (std::size_t j = 0; j < gold.size(); ++j) {
    if (!matched[j]) only_gold.push_back(gold.doc_ids[j]);
  }
  if (!only_pred.empty() || !only_gold.empty()) {
    std::sort(only_pred.begin(), only_pred.end());
    std::sort(only_gold.begin(), only_gold.end());
    std::ostringstream msg;
    msg << "clusterings cover different documents: " << only_pred.size() << " only in prediction, "
        << only_gold.size() << " only in gold";
    auto list = [&](const char* label, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg << "; " << label << ":";
      for (std::size_t i = 0; i < std::min<std::size_t>(ids.size(), 10); ++i) msg << ' ' << ids[i];
      if (ids.size() > 10) msg << " ...";
    };
    list("prediction only", only_pred);
    list("gold only", only_gold);
    throw_data(msg.str());
  }

  ContingencyTable t;
  std::unordered_map<std::string_view, std::uint32_t> pred_ids;
  std::unordered_map<std::string_view, std::uint32_t> gold_ids;
  std::unordered_map<std::uint64_t, std::uint64_t> cells;
  for (const auto& [i, j] : pairs) {
    const std::uint32_t p = intern(pred_ids, pred.cluster_ids[i]);
    const std::uint32_t g = intern(gold_ids, gold.cluster_ids[j]);
    if (p >= t.pred_sizes.size()) t.pred_sizes.push_back(0);
    if (g >= t.gold_sizes.size()) t.gold_sizes.push_back(0);
    ++t.pred_sizes[p];
    ++t.gold_sizes[g];
    ++cells[(static_cast<std::uint64_t>(p) << 32) | g];
  }
  t.total = pairs.size();
  t.cells.reserve(cells.size());
  for (const auto& [key, count] : cells) {
    t.cells.push_back({static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key), count});
  }
  std::sort(t.cells.begin(), t.cells.end(),
            [](const Cell& l, const Cell& r) { return std::tie(l.pred, l.gold) < std::tie(r.pred, r.gold); });
  return t;
}

PairCounts pair_counts(const ContingencyTable& t) {
  u128 index = 0, pred = 0, gold = 0;
  for (const auto& c : t.cells) index += choose2(c.count);
  for (auto a : t.pred_sizes) pred += choose2(a);
  for (auto b : t.gold_sizes) gold += choose2(b);
  PairCounts pc;
  pc.true_positive = static_cast<std::uint64_t>(index);
  pc.pred_positive = static_cast<std::uint64_t>(pred);
  pc.gold_positive = static_cast<std::uint64_t>(gold);
  pc.false_positive = static_cast<std::uint64_t>(pred - index);
  pc.false_negative = static_cast<std::uint64_t>(gold - index);
  pc.total_pairs = static_cast<std::uint64_t>(choose2(t.total));
  return pc;
}

double adjusted_rand_index(const ContingencyTable& t) {
  u128 index = 0, a = 0, b = 0;
  for (const auto& c : t.cells) index += choose2(c.count);
  for (auto s : t.pred_sizes) a += choose2(s);
  for (auto s : t.gold_sizes) b += choose2(s);
  const u128 n = choose2(t.total);
  // Scaled by 2n: (2n*Index - 2ab) / (n(a + b) - 2ab).
  const i128 num = static_cast<i128>(2 * n * index) - static_cast<i128>(2 * a * b);
  const i128 den = static_cast<i128>(n * (a + b)) - static_cast<i128>(2 * a * b);
  if (den == 0) return 1.0;
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

double adjusted_rand_index(const Clustering& pred, const Clustering& gold) {
  return adjusted_rand_index(ContingencyTable::build(pred, gold));
}

PairwisePRF pairwise_prf(const PairCounts& c) {
  PairwisePRF r;
  if (c.pred_positive > 0) r.precision = static_cast<double>(c.true_positive) / static_cast<double>(c.pred_positive);
  if (c.gold_positive > 0) r.recall = static_cast<double>(c.true_positive) / static_cast<double>(c.gold_positive);
  const double sum = r.precision + r.recall;
  r.f1 = sum > 0.0 ? 2.0 * r.precision * r.recall / sum : 0.0;
  return r;
}

PairwisePRF pairwise_prf(const Clustering& pred, const Clustering& gold) {
  return pairwise_prf(pair_counts(ContingencyTable::build(pred, gold)));
}

EvalReport evaluate(const Clustering& pred, const Clustering& gold) {
  const auto table = ContingencyTable::build(pred, gold);
  EvalReport r;
  r.ari = adjusted_rand_index(table);
  r.pairs = pair_counts(table);
  r.pairwise = pairwise_prf(r.pairs);
  r.predicted = cluster_stats(pred);
  r.gold = cluster_stats(gold);
  return r;
}

nlohmann::ordered_json to_json(const ClusterStats& s) {
  nlohmann::ordered_json j;
  j["documents"] = s.documents;
  j["clusters"] = s.clusters;
  j["non_singleton_clusters"] = s.non_singleton_clusters;
  j["reproduced_documents"] = s.reproduced_documents;
  j["singletons"] = s.singletons;
  j["max_cluster_size"] = s.max_size;
  j["mean_times_reproduced"] = s.mean_size;
  j["mean_defined"] = s.mean_defined;
  return j;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["ari"] = r.ari;
  j["pairwise_precision"] = r.pairwise.precision;
  j["pairwise_recall"] = r.pairwise.recall;
  j["pairwise_f1"] = r.pairwise.f1;
  j["true_positive_pairs"] = r.pairs.true_positive;
  j["false_positive_pairs"] = r.pairs.false_positive;
  j["false_negative_pairs"] = r.pairs.false_negative;
  j["gold_positive_pairs"] = r.pairs.gold_positive;
  j["predicted"] = to_json(r.predicted);
  j["gold"] = to_json(r.gold);
  return j;
}

std::string format_table(const EvalReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "ARI                   " << r.ari << '\n';
  out << "pairwise precision    " << r.pairwise.precision << '\n';
  out << "pairwise recall       " << r.pairwise.recall << '\n';
  out << "pairwise F1           " << r.pairwise.f1 << '\n';
  out << "TP / FP / FN pairs    " << r.pairs.true_positive << " / " << r.pairs.false_positive << " / "
      << r.pairs.false_negative << '\n';
  out << std::setprecision(2);
  auto stats = [&](const char* label, const ClusterStats& s) {
    out << label << s.documents << " docs, " << s.non_singleton_clusters << " reproduced articles, "
        << s.singletons << " singletons, mean times reproduced " << s.mean_size
        << (s.mean_defined ? "" : " (undefined)") << ", max " << s.max_size << '\n';
  };
  stats("predicted             ", r.predicted);
  stats("gold                  ", r.gold);
  return out.str();
}

TuningResult tune_threshold(const MethodRunner& runner, const Clustering& gold, std::span<const double> grid) {
  if (grid.empty()) throw_config("tuning grid is empty");
  TuningResult result;
  result.curve.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    result.curve[i] = {grid[i], adjusted_rand_index(runner(grid[i]), gold)};
  }, 1);
  const TuningPoint* best = nullptr;
  for (const auto& p : result.curve) {
    if (!best || p.ari > best->ari || (p.ari == best->ari && p.threshold < best->threshold)) best = &p;
  }
  result.best_threshold = best->threshold;
  result.best_ari = best->ari;
  return result;
}

TuningResult tune_threshold(const MethodRunner& runner, std::span<const Document> validation,
                            std::span<const double> grid) {
  if (!has_gold_labels(validation)) throw_data("validation corpus lacks gold_cluster labels");
  return tune_threshold(runner, gold_clustering(validation), grid);
}

std::vector<double> threshold_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw_config("bad threshold grid");
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double v = std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9;
    if (v > hi + 1e-12) break;
    grid.push_back(v);
  }
  return grid;
}

void write_curve_csv(std::ostream& out, const TuningResult& r) {
  out << "threshold,ari\n";
  for (const auto& p : r.curve) out << format_score(p.threshold) << ',' << format_score(p.ari) << '\n';
}

}  // namespace neardup
