#include "neardup/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "neardup/error.hpp"
#include "neardup/hash.hpp"
#include "neardup/overlap.hpp"
#include "neardup/parallel.hpp"

namespace neardup {

namespace {

// std::uniform_real_distribution and friends are implementation-defined, so
// all sampling goes through these to keep corpora identical across platforms.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

void check_rate(const char* name, double v) {
  if (!in_unit(v)) throw_config(std::string("noise ") + name + " must be in [0, 1]");
}

// Look-alike glyphs an OCR engine tends to confuse.
char confusable(char c, std::mt19937_64& rng) {
  static const std::map<char, std::string_view> table = {
      {'a', "oe"}, {'b', "hl"}, {'c', "eo"}, {'e', "co"}, {'f', "tl"}, {'g', "q9"}, {'h', "bn"},
      {'i', "l1"}, {'l', "i1"}, {'m', "n"},  {'n', "mu"}, {'o', "0c"}, {'r', "n"},  {'s', "5"},
      {'t', "fl"}, {'u', "nv"}, {'v', "u"},  {'y', "v"},
  };
  const auto it = table.find(c);
  if (it != table.end() && uniform01(rng) < 0.7) return it->second[uniform_index(rng, it->second.size())];
  return static_cast<char>('a' + uniform_index(rng, 26));
}

char inserted_char(std::mt19937_64& rng) {
  const double u = uniform01(rng);
  if (u < 0.1) return ' ';
  if (u < 0.15) return ".,'-:;"[uniform_index(rng, 6)];
  return static_cast<char>('a' + uniform_index(rng, 26));
}

std::string join(const std::vector<std::string_view>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out.append(w);
  }
  return out;
}

std::vector<std::string_view> split_spaces(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = text.find_first_not_of(' ', pos);
    if (start == std::string_view::npos) break;
    std::size_t end = text.find(' ', start);
    if (end == std::string_view::npos) end = text.size();
    words.push_back(text.substr(start, end - start));
    pos = end;
  }
  return words;
}

class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += std::pow(static_cast<double>(i + 1), -exponent);
      cdf_[i] = total;
    }
    for (auto& c : cdf_) c /= total;
  }

  std::size_t operator()(std::mt19937_64& rng) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), uniform01(rng));
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

std::string source_text(std::mt19937_64& rng, const GeneratorConfig& cfg, const std::vector<std::string>& vocab,
                        const ZipfSampler& zipf) {
  const std::size_t words = cfg.min_words + uniform_index(rng, cfg.max_words - cfg.min_words + 1);
  std::string text;
  std::size_t sentence_left = 0;
  for (std::size_t w = 0; w < words; ++w) {
    const bool starts_sentence = sentence_left == 0;
    if (starts_sentence) sentence_left = 6 + uniform_index(rng, 15);
    std::string word = vocab[zipf(rng)];
    if (starts_sentence && !word.empty() && word[0] >= 'a' && word[0] <= 'z') word[0] = static_cast<char>(word[0] - 32);
    if (!text.empty()) text.push_back(' ');
    text += word;
    --sentence_left;
    if (sentence_left == 0 || w + 1 == words) {
      text.push_back('.');
      sentence_left = 0;
    } else if (uniform01(rng) < 0.08) {
      text.push_back(',');
    }
  }
  return text;
}

std::string padded(std::size_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

}  // namespace

void NoiseModel::validate() const {
  check_rate("char_sub_rate", char_sub_rate);
  check_rate("char_del_rate", char_del_rate);
  check_rate("char_ins_rate", char_ins_rate);
  check_rate("word_drop_rate", word_drop_rate);
  check_rate("abridge_prob", abridge_prob);
  if (!(abridge_keep_lo > 0.0 && abridge_keep_lo <= abridge_keep_hi && abridge_keep_hi <= 1.0)) {
    throw_config("abridge keep fractions need 0 < lo <= hi <= 1");
  }
  if (!(severity_sigma >= 0.0 && severity_sigma <= 4.0)) throw_config("severity_sigma must be in [0, 4]");
}

bool NoiseModel::is_zero() const noexcept {
  return char_sub_rate == 0.0 && char_del_rate == 0.0 && char_ins_rate == 0.0 && word_drop_rate == 0.0 &&
         (abridge_prob == 0.0 || abridge_keep_lo == 1.0);
}

NoiseModel NoiseModel::none() { return {}; }

NoiseModel NoiseModel::ocr_heavy() {
  NoiseModel m;
  m.char_sub_rate = 0.03;
  m.char_del_rate = 0.009;
  m.char_ins_rate = 0.009;
  m.word_drop_rate = 0.03;
  m.abridge_prob = 0.35;
  m.abridge_keep_lo = 0.3;
  m.abridge_keep_hi = 0.95;
  m.severity_sigma = 1.8;
  return m;
}

NoiseModel NoiseModel::ocr_light() {
  NoiseModel m;
  m.char_sub_rate = 0.005;
  m.char_del_rate = 0.002;
  m.char_ins_rate = 0.002;
  m.word_drop_rate = 0.005;
  m.abridge_prob = 0.2;
  m.abridge_keep_lo = 0.5;
  m.abridge_keep_hi = 0.95;
  m.severity_sigma = 0.5;
  return m;
}

NoiseModel NoiseModel::preset(std::string_view name) {
  if (name == "none") return none();
  if (name == "ocr-light") return ocr_light();
  if (name == "ocr-heavy") return ocr_heavy();
  throw_config("unknown noise preset '" + std::string(name) + "' (expected none, ocr-light or ocr-heavy)");
}

void GeneratorConfig::validate() const {
  if (max_reproduction < 1 || max_reproduction > 200) throw_config("max_reproduction must be in [1, 200]");
  if (!in_unit(singleton_fraction)) throw_config("singleton_fraction must be in [0, 1]");
  if (singleton_fraction < 1.0 && max_reproduction < 2) {
    throw_config("singleton_fraction below 1 needs max_reproduction >= 2");
  }
  if (singleton_fraction < 1.0 && max_reproduction > 2 &&
      !(mean_reproduction > 2.0 && mean_reproduction < static_cast<double>(max_reproduction))) {
    throw_config("mean_reproduction must lie strictly between 2 and max_reproduction");
  }
  if (vocab.empty() && vocab_size == 0) throw_config("vocabulary is empty");
  for (const auto& w : vocab) {
    if (w.empty() || w.find_first_of(" \t\r\n") != std::string::npos) {
      throw_config("vocabulary words must be nonempty and contain no whitespace");
    }
  }
  if (!(zipf_exponent >= 0.0)) throw_config("zipf_exponent must be >= 0");
  if (min_words < 1 || min_words > max_words) throw_config("need 1 <= min_words <= max_words");
  if (newspapers == 0) throw_config("newspapers must be >= 1");
}

ReproductionDistribution::ReproductionDistribution(const GeneratorConfig& cfg) {
  cfg.validate();
  const std::uint32_t max = cfg.max_reproduction;
  pmf_.assign(max, 0.0);
  pmf_[0] = cfg.singleton_fraction;
  if (cfg.singleton_fraction < 1.0) {
    auto tail_mean = [&](double alpha) {
      double z = 0.0, m = 0.0;
      for (std::uint32_t c = 2; c <= max; ++c) {
        const double w = std::pow(static_cast<double>(c), -alpha);
        z += w;
        m += w * c;
      }
      return m / z;
    };
    double alpha = 0.0;
    if (max > 2) {
      // tail_mean decreases in alpha.
      double lo = -50.0, hi = 50.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail_mean(mid) > cfg.mean_reproduction ? lo : hi) = mid;
      }
      alpha = 0.5 * (lo + hi);
    }
    exponent_ = alpha;
    double z = 0.0;
    for (std::uint32_t c = 2; c <= max; ++c) z += std::pow(static_cast<double>(c), -alpha);
    for (std::uint32_t c = 2; c <= max; ++c) {
      pmf_[c - 1] = (1.0 - cfg.singleton_fraction) * std::pow(static_cast<double>(c), -alpha) / z;
    }
    mean_reproduced_ = tail_mean(alpha);
  }
  cdf_.resize(max);
  double acc = 0.0;
  for (std::uint32_t c = 1; c <= max; ++c) {
    acc += pmf_[c - 1];
    cdf_[c - 1] = acc;
    mean_count_ += pmf_[c - 1] * c;
  }
}

std::uint32_t ReproductionDistribution::sample(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u * cdf_.back());
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  return static_cast<std::uint32_t>(idx + 1);
}

std::vector<std::string> synthetic_vocabulary(std::size_t size) {
  static constexpr std::string_view consonants = "bcdfghjklmnprstvwyz";  // 19, plus "" below
  static constexpr std::string_view vowels = "aeiou";
  std::array<std::string, 100> syllables;
  for (std::size_t c = 0; c < 20; ++c) {
    for (std::size_t v = 0; v < 5; ++v) {
      std::string s;
      if (c < consonants.size()) s.push_back(consonants[c]);
      s.push_back(vowels[v]);
      if (c == consonants.size()) s.push_back('n');  // "an", "en", ... keeps spellings unambiguous
      syllables[c * 5 + v] = s;
    }
  }
  std::vector<std::string> vocab;
  vocab.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    std::string word;
    std::size_t v = i + 1;
    std::vector<std::size_t> digits;
    while (v > 0) {
      digits.push_back(v % 100);
      v /= 100;
    }
    for (auto d = digits.rbegin(); d != digits.rend(); ++d) word += syllables[*d];
    vocab.push_back(std::move(word));
  }
  return vocab;
}

std::string corrupt(std::string_view text, const NoiseModel& noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double severity =
      noise.severity_sigma > 0.0
          ? std::exp(noise.severity_sigma * standard_normal(rng) - 0.5 * noise.severity_sigma * noise.severity_sigma)
          : 1.0;
  auto scaled = [&](double rate) { return std::min(1.0, rate * severity); };

  auto words = split_spaces(text);
  if (words.empty()) return std::string(text);
  if (noise.abridge_prob > 0.0 && uniform01(rng) < noise.abridge_prob) {
    const double keep = noise.abridge_keep_lo + (noise.abridge_keep_hi - noise.abridge_keep_lo) * uniform01(rng);
    const auto kept = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(keep * static_cast<double>(words.size()))));
    words.resize(std::min(kept, words.size()));
  }
  if (noise.word_drop_rate > 0.0) {
    const double p = scaled(noise.word_drop_rate);
    std::vector<std::string_view> kept;
    for (const auto& w : words) {
      if (uniform01(rng) >= p) kept.push_back(w);
    }
    if (kept.empty()) kept.push_back(words.front());
    words = std::move(kept);
  }
  const std::string clean = join(words);

  const double p_sub = scaled(noise.char_sub_rate);
  const double p_del = scaled(noise.char_del_rate);
  const double p_ins = scaled(noise.char_ins_rate);
  if (p_sub == 0.0 && p_del == 0.0 && p_ins == 0.0) return clean;
  std::string out;
  out.reserve(clean.size() + clean.size() / 8);
  for (char ch : clean) {
    // Multi-byte UTF-8 passes through untouched.
    if (static_cast<unsigned char>(ch) >= 0x80) {
      out.push_back(ch);
      continue;
    }
    const double u = uniform01(rng);
    if (u < p_del) {
      // dropped
    } else if (u < p_del + p_sub) {
      out.push_back(ch == ' ' ? inserted_char(rng) : confusable(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))), rng));
    } else {
      out.push_back(ch);
    }
    if (p_ins > 0.0 && uniform01(rng) < p_ins) out.push_back(inserted_char(rng));
  }
  // A document must survive normalization; fall back to the word-level copy.
  if (split_words(normalize(out, NormalizationConfig::defaults())).empty()) return clean;
  return out;
}

std::size_t sources_for_documents(const GeneratorConfig& cfg, std::size_t documents) {
  const ReproductionDistribution dist(cfg);
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(documents) / dist.mean_count())));
}

std::vector<Document> generate(const GeneratorConfig& cfg, const NoiseModel& noise) {
  cfg.validate();
  noise.validate();
  const ReproductionDistribution dist(cfg);
  const std::vector<std::string> vocab = cfg.vocab.empty() ? synthetic_vocabulary(cfg.vocab_size) : cfg.vocab;
  const ZipfSampler zipf(vocab.size(), cfg.zipf_exponent);
  const int width = std::max<int>(6, static_cast<int>(std::to_string(cfg.n_sources).size()));

  std::vector<std::vector<Document>> per_source(cfg.n_sources);
  parallel_for(cfg.n_sources, [&](std::size_t s) {
    const std::uint64_t source_seed = derive_seed(cfg.seed, s);
    std::mt19937_64 rng(source_seed);
    const std::uint32_t count = dist.sample(uniform01(rng));
    const std::string cluster = cfg.id_prefix + padded(s, width);
    std::string date = "19" + padded(50 + uniform_index(rng, 10), 2) + "-" + padded(1 + uniform_index(rng, 12), 2) +
                       "-" + padded(1 + uniform_index(rng, 28), 2);
    const std::string text = source_text(rng, cfg, vocab, zipf);
    auto& out = per_source[s];
    out.reserve(count);
    for (std::uint32_t c = 0; c < count; ++c) {
      Document d;
      d.id = cluster + "-" + padded(c, 3);
      d.text = c == 0 ? text : corrupt(text, noise, derive_seed(source_seed, c));
      d.date = date;
      d.source = "paper-" + padded(1 + uniform_index(rng, cfg.newspapers), 4);
      d.gold_cluster = cluster;
      out.push_back(std::move(d));
    }
  }, 16);

  std::vector<Document> docs;
  for (auto& v : per_source) {
    for (auto& d : v) docs.push_back(std::move(d));
  }
  // Already in id order: zero-padded source index, then copy index.
  return docs;
}

NoiseReport noise_report(std::span<const Document> docs, const NormalizationConfig& norm,
                         std::span<const int> orders, std::uint64_t seed) {
  if (!has_gold_labels(docs)) throw_data("noise report needs gold_cluster labels on every document");
  std::map<std::string_view, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < docs.size(); ++i) clusters[*docs[i].gold_cluster].push_back(i);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [_, members] : clusters) {
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x + 1; y < members.size(); ++y) pairs.emplace_back(members[x], members[y]);
    }
  }

  NoiseReport report;
  report.duplicate_pairs = pairs.size();
  report.empty = pairs.empty();
  if (report.empty) return report;
  for (int n : orders) {
    const auto sets = shingle_all(docs, n, norm, seed);
    std::vector<double> overlap(pairs.size());
    std::vector<char> zero(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t p) {
      const auto& a = sets[pairs[p].first];
      const auto& b = sets[pairs[p].second];
      overlap[p] = overlap_min(a, b);
      zero[p] = intersection_size(a.shingles, b.shingles) == 0;
    }, 256);
    NoiseReportRow row;
    row.n = n;
    double sum = 0.0;
    std::size_t zeros = 0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      sum += overlap[p];
      zeros += zero[p] ? 1 : 0;
    }
    row.mean_overlap = sum / static_cast<double>(pairs.size());
    row.zero_shared_fraction = static_cast<double>(zeros) / static_cast<double>(pairs.size());
    report.rows.push_back(row);
  }
  return report;
}

NoiseReport noise_report(std::span<const Document> docs, const NormalizationConfig& norm) {
  static constexpr std::array<int, 5> kOrders = {3, 4, 5, 10, 15};
  return noise_report(docs, norm, kOrders);
}

nlohmann::ordered_json to_json(const NoiseModel& m) {
  nlohmann::ordered_json j;
  j["char_sub_rate"] = m.char_sub_rate;
  j["char_del_rate"] = m.char_del_rate;
  j["char_ins_rate"] = m.char_ins_rate;
  j["word_drop_rate"] = m.word_drop_rate;
  j["abridge_prob"] = m.abridge_prob;
  j["abridge_keep_frac_range"] = {m.abridge_keep_lo, m.abridge_keep_hi};
  j["severity_sigma"] = m.severity_sigma;
  return j;
}

nlohmann::ordered_json to_json(const GeneratorConfig& c) {
  nlohmann::ordered_json j;
  j["n_sources"] = c.n_sources;
  j["singleton_fraction"] = c.singleton_fraction;
  j["mean_reproduction"] = c.mean_reproduction;
  j["max_reproduction"] = c.max_reproduction;
  if (c.vocab.empty()) {
    j["vocab_size"] = c.vocab_size;
  } else {
    j["vocab"] = c.vocab;
  }
  j["zipf_exponent"] = c.zipf_exponent;
  j["words_per_article_range"] = {c.min_words, c.max_words};
  j["newspapers"] = c.newspapers;
  j["id_prefix"] = c.id_prefix;
  j["seed"] = c.seed;
  return j;
}

nlohmann::ordered_json to_json(const NoiseReport& r) {
  nlohmann::ordered_json j;
  j["duplicate_pairs"] = r.duplicate_pairs;
  j["empty"] = r.empty;
  j["orders"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    j["orders"].push_back({{"n", row.n},
                           {"mean_overlap", row.mean_overlap},
                           {"zero_shared_fraction", row.zero_shared_fraction}});
  }
  return j;
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw_config(std::string("config field '") + key + "' has the wrong type");
  }
}

template <typename T>
void read_range(const nlohmann::json& j, const char* key, T& lo, T& hi) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_array() || it->size() != 2) throw_config(std::string("config field '") + key + "' must be [lo, hi]");
  try {
    lo = (*it)[0].get<T>();
    hi = (*it)[1].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw_config(std::string("config field '") + key + "' has the wrong type");
  }
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known, const char* what) {
  if (!j.is_object()) throw_config(std::string(what) + " config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw_config(std::string("unknown ") + what + " config field '" + key + "'");
    }
  }
}

}  // namespace

NoiseModel noise_model_from_json(const nlohmann::json& j, NoiseModel m) {
  reject_unknown(j,
                 {"preset", "char_sub_rate", "char_del_rate", "char_ins_rate", "word_drop_rate", "abridge_prob",
                  "abridge_keep_frac_range", "severity_sigma"},
                 "noise");
  if (j.contains("preset")) {
    std::string name;
    read_field(j, "preset", name);
    m = NoiseModel::preset(name);
  }
  read_field(j, "char_sub_rate", m.char_sub_rate);
  read_field(j, "char_del_rate", m.char_del_rate);
  read_field(j, "char_ins_rate", m.char_ins_rate);
  read_field(j, "word_drop_rate", m.word_drop_rate);
  read_field(j, "abridge_prob", m.abridge_prob);
  read_range(j, "abridge_keep_frac_range", m.abridge_keep_lo, m.abridge_keep_hi);
  read_field(j, "severity_sigma", m.severity_sigma);
  m.validate();
  return m;
}

GeneratorConfig generator_config_from_json(const nlohmann::json& j, GeneratorConfig c) {
  reject_unknown(j,
                 {"n_sources", "singleton_fraction", "mean_reproduction", "max_reproduction", "vocab", "vocab_size",
                  "zipf_exponent", "words_per_article_range", "newspapers", "id_prefix", "seed"},
                 "generator");
  read_field(j, "n_sources", c.n_sources);
  read_field(j, "singleton_fraction", c.singleton_fraction);
  read_field(j, "mean_reproduction", c.mean_reproduction);
  read_field(j, "max_reproduction", c.max_reproduction);
  read_field(j, "vocab", c.vocab);
  read_field(j, "vocab_size", c.vocab_size);
  read_field(j, "zipf_exponent", c.zipf_exponent);
  read_range(j, "words_per_article_range", c.min_words, c.max_words);
  read_field(j, "newspapers", c.newspapers);
  read_field(j, "id_prefix", c.id_prefix);
  read_field(j, "seed", c.seed);
  c.validate();
  return c;
}

}  // namespace neardup
