#include <gtest/gtest.h>

#include <sstream>

#include "neardup/corpus.hpp"
#include "neardup/error.hpp"
#include "neardup/hash.hpp"
#include "neardup/parallel.hpp"
#include "support/oracles.hpp"

using namespace neardup;
namespace oracle = neardup::testing;
using oracle::Rng;

namespace {

NormalizationConfig strip_only(std::initializer_list<char32_t> cps) {
  NormalizationConfig cfg = NormalizationConfig::keep_punctuation();
  for (char32_t c : cps) cfg.strip(c);
  return cfg;
}

Document doc(std::string id, std::string text) { return Document{std::move(id), std::move(text), {}, {}, {}}; }

std::string random_unicode(Rng& rng) {
  static const std::vector<std::string> pieces = {
      "a", "B", "z", "Q", " ", "  ", "\t", "\n", "\r\n", ",", ".", "!", "?", "\xC2\xB6" /* ¶ */,
      "\xE2\x80\xA2" /* • */, "\xC2\xA0" /* nbsp */, "\xCE\xA3" /* Σ */, "\xD0\x96" /* Ж */, "\xC3\x89" /* É */,
      "\xE2\x80\x94" /* em dash */, "\xE3\x80\x80" /* ideographic space */, "\xFF" /* invalid */, "\xE2\x82" /* truncated */,
      "\xE1\xBA\x9E" /* capital sharp s */, "\xC4\xB0" /* dotted I */, "'", "\"", "-", "(", ")", "\xC2\xBF"};
  std::string s;
  const auto len = rng.between(0, 40);
  for (std::int64_t i = 0; i < len; ++i) s += pieces[static_cast<std::size_t>(rng.between(0, static_cast<std::int64_t>(pieces.size()) - 1))];
  return s;
}

}  // namespace

TEST(normalize, casefold_and_collapse_without_stripped_codepoints) {
  EXPECT_EQ(normalize("Hello,  World!", strip_only({U'\u00B6', U'\u2022'})), "hello, world!");
}

TEST(normalize, deletes_strip_set) {
  EXPECT_EQ(normalize("a\u00B6b", strip_only({U'\u00B6'})), "ab");
}

TEST(normalize, trims_and_collapses_unicode_whitespace) {
  EXPECT_EQ(normalize("  A\u00A0\u00A0b\t\nC\u3000 ", NormalizationConfig::defaults()), "a b c");
}

TEST(normalize, default_strip_set_keeps_common_punctuation) {
  const auto cfg = NormalizationConfig::defaults();
  EXPECT_EQ(normalize("Wait... \"Yes\" - it's (maybe) done; right?!", cfg), "wait... \"yes\" - it's maybe done right?");
  EXPECT_EQ(normalize("\u00BFQu\u00E9?", cfg), "qu\u00E9?");
  EXPECT_FALSE(cfg.strips(U'a'));
  EXPECT_TRUE(cfg.strips(U'\u2014'));
  EXPECT_FALSE(cfg.strips(U','));
}

TEST(normalize, options_off_leave_text_alone) {
  NormalizationConfig cfg = NormalizationConfig::keep_punctuation();
  cfg.lowercase = false;
  cfg.collapse_whitespace = false;
  EXPECT_EQ(normalize("  Ab  C ", cfg), "  Ab  C ");
}

TEST(normalize, non_ascii_lowercase) {
  EXPECT_EQ(normalize("\u0394\u0416\u00C9", NormalizationConfig::defaults()), "\u03B4\u0436\u00E9");
}

TEST(normalize, empty_output_is_legal) {
  EXPECT_EQ(normalize("!!! ;;", NormalizationConfig::defaults()), "");
  EXPECT_EQ(normalize("", NormalizationConfig::defaults()), "");
}

TEST(normalize, idempotent_on_random_strings) {
  Rng rng(11);
  const std::vector<NormalizationConfig> cfgs = {NormalizationConfig::defaults(), NormalizationConfig::keep_punctuation(),
                                                 strip_only({U'a', U' ', U'\u00B6'})};
  for (int i = 0; i < 1000; ++i) {
    const std::string s = random_unicode(rng);
    for (const auto& cfg : cfgs) {
      const std::string once = normalize(s, cfg);
      ASSERT_EQ(normalize(once, cfg), once) << "input #" << i;
    }
  }
}

TEST(normalize, strip_set_ranges_merge) {
  NormalizationConfig cfg = NormalizationConfig::keep_punctuation();
  cfg.strip_range(U'a', U'c');
  cfg.strip_range(U'd', U'f');
  cfg.keep(U'b');
  ASSERT_EQ(cfg.strip_set().size(), 2u);
  EXPECT_EQ(normalize("abcdefg", cfg), "bg");
}

TEST(shingle, windows_of_four_words) {
  const auto s = shingle(doc("x", "a b c d"), 3, NormalizationConfig::defaults(), 0);
  const std::vector<std::uint64_t> want = [] {
    std::vector<std::uint64_t> v = {xxh64("a b c", 0), xxh64("b c d", 0)};
    std::sort(v.begin(), v.end());
    return v;
  }();
  EXPECT_EQ(s.doc_id, "x");
  EXPECT_EQ(s.n, 3);
  EXPECT_EQ(s.count(), 2u);
  EXPECT_EQ(s.shingles, want);
}

TEST(shingle, too_few_words_is_empty) {
  const auto s = shingle(doc("x", "a b"), 3, NormalizationConfig::defaults());
  EXPECT_TRUE(s.empty());
  EXPECT_EQ(s.count(), 0u);
}

TEST(shingle, repeated_windows_collapse) {
  const auto s = shingle(doc("x", "a b a b a b"), 2, NormalizationConfig::defaults(), 7);
  std::vector<std::uint64_t> want = {xxh64("a b", 7), xxh64("b a", 7)};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(s.shingles, want);
}

TEST(shingle, rejects_nonpositive_order) {
  try {
    shingle(doc("x", "a b"), 0, NormalizationConfig::defaults());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}

TEST(shingle, matches_naive_window_enumeration) {
  Rng rng(5);
  const auto cfg = NormalizationConfig::defaults();
  for (int i = 0; i < 300; ++i) {
    const auto text = oracle::random_text(rng, static_cast<std::size_t>(rng.between(0, 60)), 3);
    const int n = static_cast<int>(rng.between(1, 6));
    const auto s = shingle(doc("d", text), n, cfg, 99);
    const auto want = oracle::naive_shingles(normalize(text, cfg), n, 99);
    ASSERT_EQ(s.shingles, std::vector<std::uint64_t>(want.begin(), want.end()));
    const auto words = split_words(normalize(text, cfg)).size();
    ASSERT_LE(s.count(), words >= static_cast<std::size_t>(n) ? words - static_cast<std::size_t>(n) + 1 : 0);
  }
}

TEST(shingle, independent_of_thread_count) {
  Rng rng(8);
  std::vector<Document> docs;
  for (int i = 0; i < 500; ++i) docs.push_back(doc("d" + std::to_string(i), oracle::random_text(rng, 40)));
  set_thread_count(1);
  const auto one = shingle_all(docs, 3, NormalizationConfig::defaults());
  set_thread_count(4);
  const auto four = shingle_all(docs, 3, NormalizationConfig::defaults());
  set_thread_count(0);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i].shingles, four[i].shingles);
}

TEST(split_words, unicode_whitespace) {
  const auto w = split_words("ab cd\u00A0ef");
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[2], "ef");
}

TEST(corpus_io, reads_lines_in_order) {
  std::istringstream in(
      "{\"id\":\"a\",\"text\":\"one\"}\n"
      "\n"
      "{\"id\":\"b\",\"text\":\"two\",\"date\":\"1955-01-02\",\"source\":\"paper\",\"gold_cluster\":\"g\"}\n"
      "{\"id\":\"c\",\"text\":\"three\",\"extra\":1}\n");
  const auto docs = read_corpus(in);
  ASSERT_EQ(docs.size(), 3u);
  EXPECT_EQ(docs[0].id, "a");
  EXPECT_EQ(docs[1].date, "1955-01-02");
  EXPECT_EQ(docs[1].gold_cluster, "g");
  EXPECT_EQ(docs[2].text, "three");
  EXPECT_FALSE(docs[2].source.has_value());
}

TEST(corpus_io, duplicate_id_names_the_id) {
  std::istringstream in("{\"id\":\"x\",\"text\":\"a\"}\n{\"id\":\"x\",\"text\":\"b\"}\n");
  try {
    read_corpus(in, "f.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("f.jsonl:2"), std::string::npos);
  }
}

TEST(corpus_io, malformed_line_reports_line_number) {
  const std::vector<std::string> bad = {"{\"id\":\"a\",\"text\":\"ok\"}\nnot json\n",
                                        "{\"id\":\"a\",\"text\":\"ok\"}\n[1,2]\n",
                                        "{\"id\":\"a\",\"text\":\"ok\"}\n{\"text\":\"no id\"}\n",
                                        "{\"id\":\"a\",\"text\":\"ok\"}\n{\"id\":\"b\"}\n",
                                        "{\"id\":\"a\",\"text\":\"ok\"}\n{\"id\":\"b\",\"text\":\"t\",\"date\":5}\n"};
  for (const auto& s : bad) {
    std::istringstream in(s);
    try {
      read_corpus(in, "c");
      FAIL() << s;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::data);
      EXPECT_NE(std::string(e.what()).find("c:2"), std::string::npos) << e.what();
    }
  }
}

TEST(corpus_io, canonical_file_round_trips_byte_identical) {
  const std::string canonical =
      "{\"id\":\"a\",\"text\":\"Caf\xC3\xA9 \\\"quoted\\\"\\nline\",\"date\":\"1955-01-02\"}\n"
      "{\"id\":\"b\",\"text\":\"x\",\"source\":\"The Herald\",\"gold_cluster\":\"g1\"}\n";
  std::istringstream in(canonical);
  const auto docs = read_corpus(in);
  std::ostringstream out;
  write_corpus(out, docs);
  EXPECT_EQ(out.str(), canonical);
}

TEST(corpus_io, random_documents_round_trip) {
  Rng rng(3);
  std::vector<Document> docs;
  for (int i = 0; i < 200; ++i) {
    Document d = doc("id" + std::to_string(i), random_unicode(rng));
    if (rng.chance(0.5)) d.date = "1957-03-0" + std::to_string(rng.between(1, 9));
    if (rng.chance(0.5)) d.gold_cluster = "g" + std::to_string(rng.between(0, 9));
    docs.push_back(std::move(d));
  }
  std::stringstream buf;
  write_corpus(buf, docs);
  const auto back = read_corpus(buf);
  ASSERT_EQ(back.size(), docs.size());
  // Invalid UTF-8 is replaced on write, so compare a second round trip.
  std::stringstream again;
  write_corpus(again, back);
  EXPECT_EQ(read_corpus(again), back);
  EXPECT_EQ(back[0].gold_cluster, docs[0].gold_cluster);
}

TEST(admission, rejects_documents_empty_after_normalization) {
  const std::vector<Document> docs = {doc("a", "fine text"), doc("b", " ;; ")};
  try {
    check_admissible(docs, NormalizationConfig::defaults());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
  }
  EXPECT_NO_THROW(check_admissible(std::vector<Document>{doc("a", "x")}, NormalizationConfig::defaults()));
}

TEST(admission, gold_labels_require_every_document) {
  std::vector<Document> docs = {doc("a", "x"), doc("b", "y")};
  EXPECT_FALSE(has_gold_labels(docs));
  docs[0].gold_cluster = "g";
  EXPECT_FALSE(has_gold_labels(docs));
  docs[1].gold_cluster = "g";
  EXPECT_TRUE(has_gold_labels(docs));
}

TEST(hash, xxh64_reference_vectors) {
  EXPECT_EQ(xxh64("", 0), 0xef46db3751d8e999ULL);
  EXPECT_EQ(xxh64("a", 0), 0xd24ec4f1a98c6e5bULL);
  EXPECT_EQ(xxh64("abc", 0), 0x44bc2cf5ad770999ULL);
  EXPECT_EQ(xxh64("a b c", 0), 0x92f073eb8db99995ULL);
  EXPECT_EQ(xxh64("The quick brown fox jumps over the lazy dog", 0), 0x0b242d361fda71bcULL);
  EXPECT_EQ(xxh64("", 42), 0x98b1582b0977e704ULL);
  EXPECT_EQ(xxh64("a", 42), 0x88e4fe59adf7b0ccULL);
  EXPECT_EQ(xxh64("abc", 42), 0x13c1d910702770e6ULL);
  EXPECT_EQ(xxh64("a b c", 42), 0xe1eb907c29f52478ULL);
  EXPECT_EQ(xxh64("The quick brown fox jumps over the lazy dog", 42), 0xaa9f288a8baa3d3fULL);
}
