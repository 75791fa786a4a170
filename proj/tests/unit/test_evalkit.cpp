#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "neardup/error.hpp"
#include "neardup/evalkit.hpp"
#include "support/oracles.hpp"

using namespace neardup;
namespace oracle = neardup::testing;
using oracle::Rng;

namespace {

std::vector<std::uint32_t> random_labels(Rng& rng, std::size_t n, std::uint32_t k) {
  std::vector<std::uint32_t> v(n);
  for (auto& l : v) l = static_cast<std::uint32_t>(rng.between(0, k - 1));
  return v;
}

Clustering labeled(std::vector<std::string> ids, std::vector<std::string> clusters) {
  return Clustering{std::move(ids), std::move(clusters), "t"};
}

}  // namespace

TEST(ari, matches_pair_counting_definition) {
  Rng rng(1);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = static_cast<std::size_t>(rng.between(1, 120));
    const auto pred = random_labels(rng, n, static_cast<std::uint32_t>(rng.between(1, 30)));
    const auto gold = random_labels(rng, n, static_cast<std::uint32_t>(rng.between(1, 30)));
    const double want = oracle::pair_counting_ari(pred, gold);
    ASSERT_NEAR(adjusted_rand_index(oracle::make_clustering(pred), oracle::make_clustering(gold)), want, 1e-12);
  }
}

TEST(ari, pair_counts_match_enumeration) {
  Rng rng(2);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = static_cast<std::size_t>(rng.between(2, 80));
    const auto pred = random_labels(rng, n, 6);
    const auto gold = random_labels(rng, n, 4);
    const auto c = pair_counts(ContingencyTable::build(oracle::make_clustering(pred), oracle::make_clustering(gold)));
    const auto want = oracle::naive_pair_counts(pred, gold);
    ASSERT_EQ(c.true_positive, want.tp);
    ASSERT_EQ(c.false_positive, want.fp);
    ASSERT_EQ(c.false_negative, want.fn);
    ASSERT_EQ(c.total_pairs, want.tp + want.fp + want.fn + want.tn);
  }
}

TEST(ari, identical_partitions_score_one) {
  const auto c = oracle::make_clustering({0, 0, 1, 2, 2, 2});
  EXPECT_DOUBLE_EQ(adjusted_rand_index(c, c), 1.0);
  const auto all_single = oracle::make_clustering({0, 1, 2, 3});
  EXPECT_DOUBLE_EQ(adjusted_rand_index(all_single, all_single), 1.0);
  const auto one = oracle::make_clustering({0, 0, 0});
  EXPECT_DOUBLE_EQ(adjusted_rand_index(one, one), 1.0);
}

TEST(ari, singletons_against_one_cluster_is_zero) {
  const auto single = oracle::make_clustering({0, 1, 2, 3, 4});
  const auto one = oracle::make_clustering({0, 0, 0, 0, 0});
  EXPECT_DOUBLE_EQ(adjusted_rand_index(single, one), 0.0);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(one, single), 0.0);
}

TEST(ari, symmetric_and_invariant_to_relabeling_and_order) {
  Rng rng(3);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = static_cast<std::size_t>(rng.between(2, 60));
    const auto pred = random_labels(rng, n, 5);
    const auto gold = random_labels(rng, n, 5);
    const auto p = oracle::make_clustering(pred);
    const auto g = oracle::make_clustering(gold);
    const double base = adjusted_rand_index(p, g);
    ASSERT_DOUBLE_EQ(base, adjusted_rand_index(g, p));

    auto renamed = p;
    for (auto& c : renamed.cluster_ids) c = "other-" + c;
    ASSERT_DOUBLE_EQ(base, adjusted_rand_index(renamed, g));

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    Clustering shuffled;
    for (std::size_t i : perm) {
      shuffled.doc_ids.push_back(p.doc_ids[i]);
      shuffled.cluster_ids.push_back(p.cluster_ids[i]);
    }
    ASSERT_DOUBLE_EQ(base, adjusted_rand_index(shuffled, g));
  }
}

TEST(ari, large_partitions_do_not_overflow) {
  // 3 million documents in two halves; pair counts exceed 2^42.
  const std::size_t n = 3'000'000;
  ContingencyTable t;
  t.total = n;
  t.pred_sizes = {n / 2, n / 2};
  t.gold_sizes = {n / 2, n / 2};
  t.cells = {{0, 0, n / 2}, {1, 1, n / 2}};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(t), 1.0);
  t.cells = {{0, 0, n / 4}, {0, 1, n / 4}, {1, 0, n / 4}, {1, 1, n / 4}};
  EXPECT_NEAR(adjusted_rand_index(t), 0.0, 1e-6);
}

TEST(ari, mismatched_documents_are_listed) {
  const auto a = labeled({"x", "y"}, {"1", "1"});
  const auto b = labeled({"x", "z"}, {"1", "1"});
  try {
    adjusted_rand_index(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    const std::string what = e.what();
    EXPECT_NE(what.find("y"), std::string::npos);
    EXPECT_NE(what.find("z"), std::string::npos);
  }
  EXPECT_THROW(adjusted_rand_index(labeled({"x", "x"}, {"1", "2"}), labeled({"x", "y"}, {"1", "1"})), Error);
}

TEST(prf, conventions_for_degenerate_cases) {
  const auto single = oracle::make_clustering({0, 1, 2});
  const auto one = oracle::make_clustering({0, 0, 0});
  const auto none_predicted = pairwise_prf(single, one);
  EXPECT_EQ(none_predicted.precision, 1.0);
  EXPECT_EQ(none_predicted.recall, 0.0);
  EXPECT_EQ(none_predicted.f1, 0.0);

  const auto no_gold = pairwise_prf(one, single);
  EXPECT_EQ(no_gold.precision, 0.0);
  EXPECT_EQ(no_gold.recall, 1.0);
  EXPECT_EQ(no_gold.f1, 0.0);

  const auto both_empty = pairwise_prf(single, single);
  EXPECT_EQ(both_empty.precision, 1.0);
  EXPECT_EQ(both_empty.recall, 1.0);
  EXPECT_EQ(both_empty.f1, 1.0);
}

TEST(prf, worked_example) {
  // pred {0,1,2}{3}, gold {0,1}{2,3}: tp 1, fp 2, fn 1.
  const auto pred = oracle::make_clustering({0, 0, 0, 1});
  const auto gold = oracle::make_clustering({0, 0, 1, 1});
  const auto r = pairwise_prf(pred, gold);
  EXPECT_DOUBLE_EQ(r.precision, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.f1, 0.4);
}

TEST(evaluate, report_and_json) {
  const auto pred = oracle::make_clustering({0, 0, 1, 2});
  const auto gold = oracle::make_clustering({0, 0, 1, 1});
  const auto r = evaluate(pred, gold);
  EXPECT_EQ(r.predicted.non_singleton_clusters, 1u);
  EXPECT_EQ(r.gold.non_singleton_clusters, 2u);
  EXPECT_EQ(r.pairs.true_positive, 1u);
  const auto j = to_json(r);
  EXPECT_DOUBLE_EQ(j["ari"].get<double>(), r.ari);
  EXPECT_DOUBLE_EQ(j["pairwise_recall"].get<double>(), r.pairwise.recall);
  EXPECT_EQ(j["predicted"]["non_singleton_clusters"].get<std::size_t>(), 1u);
  EXPECT_NE(format_table(r).find("ARI"), std::string::npos);
}

TEST(tuning, single_point_grid) {
  const auto gold = oracle::make_clustering({0, 0, 1});
  const std::vector<double> grid = {0.42};
  const auto r = tune_threshold([&](double) { return gold; }, gold, grid);
  EXPECT_EQ(r.best_threshold, 0.42);
  EXPECT_EQ(r.best_ari, 1.0);
  ASSERT_EQ(r.curve.size(), 1u);
  EXPECT_THROW(tune_threshold([&](double) { return gold; }, gold, std::vector<double>{}), Error);
}

TEST(tuning, ties_go_to_smallest_threshold) {
  const auto gold = oracle::make_clustering({0, 0, 1, 1});
  const auto grid = threshold_grid(0.1, 0.9, 0.1);
  // Perfect everywhere in [0.3, 0.6].
  const auto r = tune_threshold(
      [&](double t) { return t >= 0.3 - 1e-9 && t <= 0.6 + 1e-9 ? gold : oracle::make_clustering({0, 1, 2, 3}); },
      gold, grid);
  EXPECT_DOUBLE_EQ(r.best_threshold, 0.3);
  EXPECT_EQ(r.curve.size(), grid.size());
}

TEST(tuning, picks_threshold_between_duplicate_and_unrelated_scores) {
  // Duplicates score 0.9 against each other, unrelated pairs 0.1; the runner
  // joins every pair scoring >= threshold.
  const std::vector<std::uint32_t> gold_labels = {0, 0, 0, 1, 1, 2, 3, 3};
  const auto gold = oracle::make_clustering(gold_labels);
  const std::size_t n = gold_labels.size();
  const auto runner = [&](double t) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t a = 0; a < n; ++a)
      for (std::uint32_t b = a + 1; b < n; ++b) {
        const double s = gold_labels[a] == gold_labels[b] ? 0.9 : 0.1;
        if (s >= t) edges.emplace_back(a, b);
      }
    return oracle::make_clustering(oracle::union_find_labels(n, edges));
  };
  const auto r = tune_threshold(runner, gold, threshold_grid(0.0, 1.0, 0.01));
  EXPECT_GT(r.best_threshold, 0.1);
  EXPECT_LE(r.best_threshold, 0.9);
  EXPECT_DOUBLE_EQ(r.best_ari, 1.0);
}

TEST(tuning, validation_needs_labels) {
  const std::vector<Document> docs = {{"a", "x", {}, {}, {}}};
  EXPECT_THROW(tune_threshold([](double) { return Clustering{}; }, docs, std::vector<double>{0.5}), Error);
}

TEST(threshold_grid, inclusive_and_rounded) {
  const auto g = threshold_grid(0.01, 1.0, 0.01);
  ASSERT_EQ(g.size(), 100u);
  EXPECT_EQ(g.front(), 0.01);
  EXPECT_EQ(g[29], 0.3);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_EQ(threshold_grid(0.80, 0.99, 0.005).size(), 39u);
  EXPECT_THROW(threshold_grid(1.0, 0.0, 0.1), Error);
  EXPECT_THROW(threshold_grid(0.0, 1.0, 0.0), Error);
}

TEST(threshold_grid, curve_csv) {
  TuningResult r;
  r.curve = {{0.5, 1.0}, {0.75, 0.25}};
  std::ostringstream out;
  write_curve_csv(out, r);
  EXPECT_EQ(out.str(), "threshold,ari\n0.5,1\n0.75,0.25\n");
}
