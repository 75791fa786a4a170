#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "neardup/corpus.hpp"

namespace neardup {

/// Corruption applied to each reproduced copy of a source article.
struct NoiseModel {
  double char_sub_rate = 0.0;
  double char_del_rate = 0.0;
  double char_ins_rate = 0.0;
  double word_drop_rate = 0.0;
  double abridge_prob = 0.0;
  double abridge_keep_lo = 1.0;  // fraction of leading words kept
  double abridge_keep_hi = 1.0;
  // Each copy scales the character and word rates by a log-normal factor
  // with mean 1 and this log-space standard deviation. Scanned pages vary a
  // lot in quality, so a few copies come out far noisier than the rest.
  double severity_sigma = 0.0;

  void validate() const;
  bool is_zero() const noexcept;

  static NoiseModel none();
  /// Calibrated so that duplicate pairs share about 56% of their 3-grams and
  /// roughly a fifth of them share no 10-gram.
  static NoiseModel ocr_heavy();
  static NoiseModel ocr_light();
  /// "none", "ocr-light" or "ocr-heavy".
  static NoiseModel preset(std::string_view name);
};

struct GeneratorConfig {
  std::size_t n_sources = 1000;
  // Share of sources that appear exactly once.
  double singleton_fraction = 0.8;
  // Mean number of appearances of a reproduced (count >= 2) source.
  double mean_reproduction = 6.3;
  std::uint32_t max_reproduction = 200;
  // Empty means the built-in synthetic vocabulary of `vocab_size` words.
  std::vector<std::string> vocab;
  std::size_t vocab_size = 30'000;
  double zipf_exponent = 0.9;
  std::size_t min_words = 60;
  std::size_t max_words = 400;
  std::size_t newspapers = 973;
  std::string id_prefix = "d";
  std::uint64_t seed = 1;

  void validate() const;
};

/// Categorical distribution of appearances per source over 1..max: mass
/// singleton_fraction at 1 and a truncated power law over 2..max whose
/// exponent is solved so its mean equals mean_reproduction.
class ReproductionDistribution {
 public:
  explicit ReproductionDistribution(const GeneratorConfig& cfg);

  std::uint32_t sample(double uniform01) const;
  double exponent() const noexcept { return exponent_; }
  /// Expected count among reproduced sources.
  double mean_reproduced() const noexcept { return mean_reproduced_; }
  /// Expected count over all sources.
  double mean_count() const noexcept { return mean_count_; }
  std::span<const double> pmf() const noexcept { return pmf_; }  // pmf()[c - 1] = P(count = c)

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double exponent_ = 0.0;
  double mean_reproduced_ = 0.0;
  double mean_count_ = 0.0;
};

/// Deterministic pseudo-word vocabulary; word i is the base-100 spelling of
/// i + 1 over consonant-vowel syllables.
std::vector<std::string> synthetic_vocabulary(std::size_t size);

/// Source articles plus their noisy copies, sorted by id. Every document of
/// one source shares the source's gold_cluster.
std::vector<Document> generate(const GeneratorConfig& cfg, const NoiseModel& noise);

/// Number of sources expected to yield about `documents` documents.
std::size_t sources_for_documents(const GeneratorConfig& cfg, std::size_t documents);

/// Applies the noise channel to one text. Exposed for tests.
std::string corrupt(std::string_view text, const NoiseModel& noise, std::uint64_t seed);

struct NoiseReportRow {
  int n = 0;
  double mean_overlap = 0.0;          // mean min-normalized N-gram overlap
  double zero_shared_fraction = 0.0;  // pairs sharing no N-gram
};

struct NoiseReport {
  std::size_t duplicate_pairs = 0;
  bool empty = true;  // no gold duplicate pairs to measure
  std::vector<NoiseReportRow> rows;
};

/// Measures N-gram survival over every pair of documents sharing a gold
/// cluster. Throws a data error for unlabeled corpora.
NoiseReport noise_report(std::span<const Document> docs, const NormalizationConfig& norm,
                         std::span<const int> orders, std::uint64_t seed = kDefaultSeed);
NoiseReport noise_report(std::span<const Document> docs, const NormalizationConfig& norm);

nlohmann::ordered_json to_json(const NoiseModel& m);
nlohmann::ordered_json to_json(const GeneratorConfig& c);
nlohmann::ordered_json to_json(const NoiseReport& r);
/// Fields absent from `j` keep the values of `base`.
NoiseModel noise_model_from_json(const nlohmann::json& j, NoiseModel base = {});
GeneratorConfig generator_config_from_json(const nlohmann::json& j, GeneratorConfig base = {});

}  // namespace neardup
