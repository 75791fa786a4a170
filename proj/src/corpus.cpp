#include "neardup/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "neardup/error.hpp"
#include "neardup/parallel.hpp"
#include "unicode_tables.hpp"
#include "utf8.hpp"

namespace neardup {

namespace {

template <typename Range>
bool in_ranges(std::span<const Range> ranges, char32_t cp) noexcept {
  auto it = std::upper_bound(ranges.begin(), ranges.end(), cp,
                             [](char32_t c, const Range& r) { return c < r.first; });
  return it != ranges.begin() && cp <= std::prev(it)->last;
}

char32_t to_lower(char32_t cp) noexcept {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
  const auto table = unicode::lowercase_mappings();
  auto it = std::lower_bound(table.begin(), table.end(), cp,
                             [](const unicode::CaseMapping& m, char32_t c) { return m.from < c; });
  return (it != table.end() && it->from == cp) ? it->to : cp;
}

bool is_space(char32_t cp) noexcept {
  return in_ranges(unicode::whitespace_ranges(), cp);
}

}  // namespace

NormalizationConfig NormalizationConfig::defaults() {
  NormalizationConfig cfg;
  for (const auto& r : unicode::punctuation_ranges()) cfg.strip_range(r.first, r.last);
  for (char32_t cp : {U'.', U',', U'\'', U'"', U'-', U'?'}) cfg.keep(cp);
  return cfg;
}

NormalizationConfig NormalizationConfig::keep_punctuation() { return {}; }

void NormalizationConfig::strip_range(char32_t first, char32_t last) {
  if (first > last) std::swap(first, last);
  strip_.push_back({first, last});
  std::sort(strip_.begin(), strip_.end(),
            [](const CodepointSpan& a, const CodepointSpan& b) { return a.first < b.first; });
  std::vector<CodepointSpan> merged;
  for (const auto& r : strip_) {
    if (!merged.empty() && r.first <= merged.back().last + 1) {
      merged.back().last = std::max(merged.back().last, r.last);
    } else {
      merged.push_back(r);
    }
  }
  strip_ = std::move(merged);
}

void NormalizationConfig::keep(char32_t cp) {
  std::vector<CodepointSpan> out;
  for (const auto& r : strip_) {
    if (cp < r.first || cp > r.last) {
      out.push_back(r);
      continue;
    }
    if (r.first < cp) out.push_back({r.first, cp - 1});
    if (cp < r.last) out.push_back({cp + 1, r.last});
  }
  strip_ = std::move(out);
}

bool NormalizationConfig::strips(char32_t cp) const noexcept {
  return in_ranges(std::span<const CodepointSpan>(strip_), cp);
}

std::string normalize(std::string_view text, const NormalizationConfig& cfg) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  utf8::for_each_codepoint(text, [&](char32_t cp) {
    if (cfg.lowercase) cp = to_lower(cp);
    if (cfg.collapse_whitespace && is_space(cp)) {
      pending_space = !out.empty();
      return;
    }
    if (cfg.strips(cp)) return;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    utf8::append(out, cp);
  });
  return out;
}

std::vector<std::string_view> split_words(std::string_view normalized) {
  std::vector<std::string_view> words;
  std::size_t start = std::string_view::npos;
  std::size_t pos = 0;
  while (pos < normalized.size()) {
    std::size_t next = pos;
    const char32_t cp = utf8::decode_one(normalized, next);
    if (is_space(cp)) {
      if (start != std::string_view::npos) {
        words.push_back(normalized.substr(start, pos - start));
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = pos;
    }
    pos = next;
  }
  if (start != std::string_view::npos) words.push_back(normalized.substr(start));
  return words;
}

std::uint64_t shingle_hash(std::string_view joined_words, std::uint64_t seed) {
  return xxh64(joined_words, seed);
}

ShingleSet shingle(const Document& doc, int n, const NormalizationConfig& cfg,
                   std::uint64_t seed) {
  if (n < 1) throw_config("shingle order must be >= 1, got " + std::to_string(n));
  ShingleSet out;
  out.doc_id = doc.id;
  out.n = n;
  const std::string normalized = normalize(doc.text, cfg);
  const auto words = split_words(normalized);
  const auto order = static_cast<std::size_t>(n);
  if (words.size() < order) return out;

  out.shingles.reserve(words.size() - order + 1);
  std::string window;
  for (std::size_t i = 0; i + order <= words.size(); ++i) {
    window.clear();
    for (std::size_t j = 0; j < order; ++j) {
      if (j) window.push_back(' ');
      window.append(words[i + j]);
    }
    out.shingles.push_back(shingle_hash(window, seed));
  }
  std::sort(out.shingles.begin(), out.shingles.end());
  out.shingles.erase(std::unique(out.shingles.begin(), out.shingles.end()), out.shingles.end());
  return out;
}

std::vector<ShingleSet> shingle_all(std::span<const Document> docs, int n,
                                    const NormalizationConfig& cfg, std::uint64_t seed) {
  std::vector<ShingleSet> out(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { out[i] = shingle(docs[i], n, cfg, seed); });
  return out;
}

namespace {

std::optional<std::string> optional_field(const nlohmann::json& obj, const char* key,
                                          const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw_data(where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

std::vector<Document> read_corpus(std::istream& in, const std::string& origin) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw_data(where + ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw_data(where + ": expected a JSON object");
    auto id = obj.find("id");
    auto text = obj.find("text");
    if (id == obj.end() || !id->is_string() || id->get_ref<const std::string&>().empty()) {
      throw_data(where + ": missing or empty string field 'id'");
    }
    if (text == obj.end() || !text->is_string()) {
      throw_data(where + ": missing string field 'text'");
    }
    Document doc;
    doc.id = id->get<std::string>();
    doc.text = text->get<std::string>();
    doc.date = optional_field(obj, "date", where);
    doc.source = optional_field(obj, "source", where);
    doc.gold_cluster = optional_field(obj, "gold_cluster", where);
    if (!seen.insert(doc.id).second) {
      throw_data(where + ": duplicate document id '" + doc.id + "'");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open corpus file " + path.string());
  return read_corpus(in, path.string());
}

void write_corpus(std::ostream& out, std::span<const Document> docs) {
  for (const auto& doc : docs) {
    nlohmann::ordered_json obj;
    obj["id"] = doc.id;
    obj["text"] = doc.text;
    if (doc.date) obj["date"] = *doc.date;
    if (doc.source) obj["source"] = *doc.source;
    if (doc.gold_cluster) obj["gold_cluster"] = *doc.gold_cluster;
    out << obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, std::span<const Document> docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write corpus file " + path.string());
  write_corpus(out, docs);
}

void check_admissible(std::span<const Document> docs, const NormalizationConfig& cfg) {
  std::unordered_set<std::string_view> seen;
  for (const auto& doc : docs) {
    if (doc.id.empty()) throw_data("document with empty id");
    if (!seen.insert(doc.id).second) throw_data("duplicate document id '" + doc.id + "'");
    if (normalize(doc.text, cfg).empty()) {
      throw_data("document '" + doc.id + "' is empty after normalization");
    }
  }
}

bool has_gold_labels(std::span<const Document> docs) noexcept {
  return !docs.empty() &&
         std::all_of(docs.begin(), docs.end(), [](const Document& d) { return d.gold_cluster.has_value(); });
}

}  // namespace neardup
