#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <tuple>

#include "neardup/error.hpp"
#include "neardup/overlap.hpp"
#include "neardup/parallel.hpp"
#include "support/oracles.hpp"

using namespace neardup;
namespace oracle = neardup::testing;
using oracle::Rng;

namespace {

ShingleSet set_of(std::vector<std::uint64_t> v, std::string id = "x") {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return ShingleSet{std::move(id), 3, std::move(v)};
}

std::vector<ShingleSet> random_sets(Rng& rng, std::size_t docs, std::uint64_t universe, std::size_t max_size) {
  std::vector<ShingleSet> sets;
  for (std::size_t d = 0; d < docs; ++d) {
    std::vector<std::uint64_t> v;
    const auto size = rng.between(0, static_cast<std::int64_t>(max_size));
    for (std::int64_t i = 0; i < size; ++i) v.push_back(rng.next() % universe);
    sets.push_back(set_of(std::move(v), "d" + std::to_string(d)));
  }
  return sets;
}

}  // namespace

TEST(set_metrics, worked_example) {
  const auto a = set_of({1, 2, 3, 4});
  const auto b = set_of({3, 4, 5});
  EXPECT_DOUBLE_EQ(overlap_min(a, b), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(jaccard(a, b), 2.0 / 5.0);
  EXPECT_EQ(intersection_size(a.shingles, b.shingles), 2u);
}

TEST(set_metrics, subset_has_full_overlap) {
  const auto a = set_of({1, 2, 3, 4, 5, 6});
  const auto b = set_of({2, 5});
  EXPECT_DOUBLE_EQ(overlap_min(a, b), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(a, b), 2.0 / 6.0);
}

TEST(set_metrics, empty_sets_score_zero) {
  const auto e = set_of({});
  const auto a = set_of({1});
  EXPECT_EQ(overlap_min(e, a), 0.0);
  EXPECT_EQ(overlap_min(e, e), 0.0);
  EXPECT_EQ(jaccard(e, e), 0.0);
  EXPECT_EQ(jaccard(a, e), 0.0);
}

TEST(set_metrics, overlap_min_bounds_jaccard) {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_sets(rng, 2, 30, 20);
    const double o = overlap_min(s[0], s[1]);
    const double j = jaccard(s[0], s[1]);
    ASSERT_GE(o, j);
    ASSERT_GE(j, 0.0);
    ASSERT_LE(o, 1.0);
    ASSERT_DOUBLE_EQ(o, overlap_min(s[1], s[0]));
    ASSERT_DOUBLE_EQ(j, jaccard(s[1], s[0]));
  }
}

TEST(set_metrics, unknown_metric_name) {
  EXPECT_THROW(parse_metric("cosine-ish"), Error);
  EXPECT_EQ(parse_metric(metric_name(Metric::jaccard)), Metric::jaccard);
  EXPECT_THROW(score_from_counts(Metric::cosine, 1, 2, 3), Error);
}

TEST(inverted_index, candidates_match_brute_force) {
  Rng rng(31);
  for (int round = 0; round < 20; ++round) {
    const auto sets = random_sets(rng, 200, 400, 25);
    const auto index = InvertedIndex::from_shingles(sets, {.hot_key_cap = 0});
    for (std::uint32_t m : {1u, 2u, 4u}) {
      ASSERT_EQ(index.candidate_pairs(m), oracle::brute_force_pairs(sets, m)) << "round " << round << " m " << m;
    }
  }
}

TEST(inverted_index, hot_keys_are_skipped_but_counted) {
  // Key 100 is in every document; keys 1 and 2 link only d0 and d1.
  std::vector<ShingleSet> sets;
  for (int d = 0; d < 6; ++d) sets.push_back(set_of({100, static_cast<std::uint64_t>(200 + d)}));
  sets[0] = set_of({100, 1, 2});
  sets[1] = set_of({100, 1, 2, 7});
  const auto index = InvertedIndex::from_shingles(sets, {.hot_key_cap = 5});
  EXPECT_EQ(index.hot_key_count(), 1u);
  ASSERT_EQ(index.hot_keys().size(), 1u);
  EXPECT_EQ(index.hot_keys()[0].value, 100u);
  const auto pairs = index.candidate_pairs(1);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0], (CandidatePair{0, 1, 3}));

  const auto uncapped = InvertedIndex::from_shingles(sets, {.hot_key_cap = 0});
  EXPECT_EQ(uncapped.hot_key_count(), 0u);
  EXPECT_EQ(uncapped.candidate_pairs(1).size(), 15u);
}

TEST(inverted_index, postings_are_sorted_and_deduplicated) {
  const std::vector<std::vector<IndexKey>> keys = {{{0, 5}, {0, 5}, {1, 5}}, {{0, 5}}, {}};
  const auto index = InvertedIndex::from_keys(keys, {.hot_key_cap = 0});
  EXPECT_EQ(index.doc_count(), 3u);
  EXPECT_EQ(index.key_count(), 2u);
  const auto p = index.postings({0, 5});
  EXPECT_EQ(std::vector<DocIndex>(p.begin(), p.end()), (std::vector<DocIndex>{0, 1}));
  EXPECT_TRUE(index.postings({7, 7}).empty());
  EXPECT_EQ(index.doc_key_count(0), 2u);
  EXPECT_THROW(index.candidate_pairs(0), Error);
}

TEST(inverted_index, independent_of_thread_count) {
  Rng rng(4);
  const auto sets = random_sets(rng, 600, 500, 30);
  set_thread_count(1);
  const auto one = InvertedIndex::from_shingles(sets).candidate_pairs(1);
  set_thread_count(3);
  const auto three = InvertedIndex::from_shingles(sets).candidate_pairs(1);
  set_thread_count(0);
  EXPECT_EQ(one, three);
}

TEST(score_edges, matches_brute_force_for_both_metrics) {
  Rng rng(17);
  for (int round = 0; round < 10; ++round) {
    const auto sets = random_sets(rng, 200, 300, 20);
    const auto pairs = InvertedIndex::from_shingles(sets, {.hot_key_cap = 0}).candidate_pairs(1);
    for (Metric metric : {Metric::overlap_min, Metric::jaccard}) {
      for (double t : {0.0, 0.1, 0.25, 0.5, 1.0}) {
        const auto edges = score_edges(pairs, sets, metric, t);
        const auto want = oracle::brute_force_edges(sets, metric, t);
        ASSERT_EQ(oracle::edge_keys(edges), oracle::edge_keys(want)) << metric_name(metric) << " " << t;
        for (std::size_t i = 0; i < edges.size(); ++i) ASSERT_DOUBLE_EQ(edges[i].score, want[i].score);
      }
    }
  }
}

TEST(score_edges, threshold_edge_cases) {
  const std::vector<ShingleSet> sets = {set_of({1, 2}), set_of({1, 2, 3}), set_of({3, 4}), set_of({9})};
  const auto pairs = InvertedIndex::from_shingles(sets).candidate_pairs(1);
  // Threshold 0 keeps every candidate but never invents pairs without a shared shingle.
  EXPECT_EQ(score_edges(pairs, sets, Metric::overlap_min, 0.0).size(), 2u);
  const auto full = score_edges(pairs, sets, Metric::overlap_min, 1.0);
  ASSERT_EQ(full.size(), 1u);
  EXPECT_EQ(full[0], (Edge{0, 1, 1.0}));
  EXPECT_TRUE(score_edges(pairs, sets, Metric::jaccard, 1.0).empty());
  EXPECT_THROW(score_edges(pairs, sets, Metric::jaccard, 1.5), Error);
  EXPECT_THROW(score_edges(pairs, sets, Metric::cosine, 0.5), Error);
}

TEST(scored_pairs, ordered_by_id) {
  const std::vector<std::string> ids = {"b", "a", "c"};
  const std::vector<Edge> edges = {{0, 1, 0.5}, {1, 2, 0.25}, {0, 2, 1.0000001}};
  const auto out = to_scored_pairs(edges, ids, Metric::cosine);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].id_a, "a");
  EXPECT_EQ(out[0].id_b, "b");
  EXPECT_EQ(out[1].id_b, "c");
  EXPECT_EQ(out[2].id_a, "b");
  EXPECT_EQ(out[2].score, 1.0);
}

TEST(edge_file, round_trip_preserves_scores_exactly) {
  Rng rng(2);
  std::vector<ScoredPair> edges;
  for (int i = 0; i < 300; ++i) {
    edges.push_back({"a" + std::to_string(i), "b" + std::to_string(i), rng.uniform(), Metric::jaccard});
  }
  edges.push_back({"x", "y", 1.0 / 3.0, Metric::collisions_fraction});
  std::sort(edges.begin(), edges.end(), [](const ScoredPair& l, const ScoredPair& r) {
    return std::tie(l.id_a, l.id_b) < std::tie(r.id_a, r.id_b);
  });
  std::stringstream buf;
  write_edges(buf, edges);
  EXPECT_EQ(read_edges(buf), edges);
}

TEST(edge_file, swaps_reversed_ids) {
  std::istringstream in("z\ta\t0.5\tcosine\n\n");
  const auto e = read_edges(in);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].id_a, "a");
  EXPECT_EQ(e[0].metric, Metric::cosine);
}

TEST(edge_file, rejects_malformed_lines) {
  for (const std::string bad : {"a\tb\t0.5\n", "a\ta\t0.5\tcosine\n", "a\tb\thalf\tcosine\n", "a\tb\t0.5\tnope\n",
                                "\tb\t0.5\tcosine\n"}) {
    std::istringstream in("p\tq\t1\tjaccard\n" + bad);
    try {
      read_edges(in, "e.tsv");
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::data);
      EXPECT_NE(std::string(e.what()).find("e.tsv:2"), std::string::npos) << e.what();
    }
  }
}

TEST(format_score, shortest_round_trip) {
  EXPECT_EQ(format_score(0.5), "0.5");
  EXPECT_EQ(format_score(1.0), "1");
  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_score(third)), third);
}
