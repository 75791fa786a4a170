#include "neardup/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "binio.hpp"
#include "neardup/error.hpp"
#include "neardup/hash.hpp"
#include "neardup/parallel.hpp"

namespace neardup {

bool MinHashSignature::empty() const noexcept {
  return std::all_of(minima.begin(), minima.end(), [](std::uint64_t v) { return v == kEmptyMinimum; });
}

MinHasher::MinHasher(std::uint32_t k, std::uint64_t seed) : seed_(seed) {
  if (k < 1) throw_config("minhash needs k >= 1");
  keys_.reserve(k);
  for (std::uint32_t i = 0; i < k; ++i) keys_.push_back(derive_seed(seed, i));
}

std::uint64_t MinHasher::hash(std::uint32_t i, std::uint64_t x) const noexcept {
  return fmix64(x ^ keys_[i]);
}

MinHashSignature MinHasher::sign(const ShingleSet& s) const {
  MinHashSignature sig;
  sig.doc_id = s.doc_id;
  sig.k = k();
  sig.seed = seed_;
  sig.minima.assign(keys_.size(), kEmptyMinimum);
  for (std::uint64_t x : s.shingles) {
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      sig.minima[i] = std::min(sig.minima[i], fmix64(x ^ keys_[i]));
    }
  }
  return sig;
}

MinHashSignature minhash(const ShingleSet& s, std::uint32_t k, std::uint64_t seed) {
  return MinHasher(k, seed).sign(s);
}

std::vector<MinHashSignature> minhash_all(std::span<const ShingleSet> sets, std::uint32_t k,
                                          std::uint64_t seed) {
  const MinHasher hasher(k, seed);
  std::vector<MinHashSignature> out(sets.size());
  parallel_for(sets.size(), [&](std::size_t i) { out[i] = hasher.sign(sets[i]); });
  return out;
}

std::uint32_t agreement(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.k != b.k || a.seed != b.seed) throw_config("comparing signatures with different k or seed");
  std::uint32_t same = 0;
  for (std::size_t i = 0; i < a.minima.size(); ++i) same += a.minima[i] == b.minima[i];
  return same;
}

double collision_fraction(const MinHashSignature& a, const MinHashSignature& b) {
  return a.k == 0 ? 0.0 : static_cast<double>(agreement(a, b)) / a.k;
}

namespace {

std::uint32_t common_k(std::span<const MinHashSignature> sigs) {
  if (sigs.empty()) return 0;
  for (const auto& s : sigs) {
    if (s.k != sigs.front().k || s.seed != sigs.front().seed || s.minima.size() != s.k) {
      throw_data("signatures disagree on k or seed (doc '" + s.doc_id + "')");
    }
  }
  return sigs.front().k;
}

}  // namespace

std::vector<Edge> collision_lsh(std::span<const MinHashSignature> sigs, std::uint32_t min_collisions) {
  const std::uint32_t k = common_k(sigs);
  if (sigs.empty()) return {};
  if (min_collisions < 1 || min_collisions > k) throw_config("min_collisions must lie in [1, k]");

  std::vector<std::vector<IndexKey>> keys(sigs.size());
  for (std::size_t d = 0; d < sigs.size(); ++d) {
    if (sigs[d].empty()) continue;
    keys[d].reserve(k);
    for (std::uint32_t i = 0; i < k; ++i) keys[d].push_back({i, sigs[d].minima[i]});
  }
  const auto index = InvertedIndex::from_keys(keys, {.hot_key_cap = 0});
  std::vector<Edge> edges;
  for (const auto& p : index.candidate_pairs(min_collisions)) {
    edges.push_back({p.a, p.b, static_cast<double>(p.shared) / k});
  }
  return edges;
}

void BandingConfig::validate(std::uint32_t k) const {
  if (bands < 1 || rows < 1) throw_config("banding needs bands >= 1 and rows >= 1");
  if (static_cast<std::uint64_t>(bands) * rows > k) {
    throw_config("bands * rows = " + std::to_string(bands * rows) + " exceeds signature length " +
                 std::to_string(k));
  }
}

std::uint64_t band_hash(std::span<const std::uint64_t> rows, std::uint32_t band) {
  std::string bytes(rows.size() * 8, '\0');
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int b = 0; b < 8; ++b) bytes[r * 8 + b] = static_cast<char>(rows[r] >> (8 * b));
  }
  return xxh64(bytes, band);
}

std::vector<IndexKey> band_keys(const MinHashSignature& sig, const BandingConfig& cfg) {
  cfg.validate(sig.k);
  std::vector<IndexKey> keys;
  keys.reserve(cfg.bands);
  for (std::uint32_t b = 0; b < cfg.bands; ++b) {
    std::span<const std::uint64_t> rows(sig.minima.data() + static_cast<std::size_t>(b) * cfg.rows, cfg.rows);
    keys.push_back({b, band_hash(rows, b)});
  }
  return keys;
}

std::vector<Edge> banded_lsh(std::span<const MinHashSignature> sigs, const BandingConfig& cfg,
                             std::uint32_t min_shared_bands) {
  const std::uint32_t k = common_k(sigs);
  if (sigs.empty()) return {};
  cfg.validate(k);
  if (min_shared_bands < 1 || min_shared_bands > cfg.bands) {
    throw_config("min_shared_bands must lie in [1, bands]");
  }
  std::vector<std::vector<IndexKey>> keys(sigs.size());
  parallel_for(sigs.size(), [&](std::size_t d) {
    if (!sigs[d].empty()) keys[d] = band_keys(sigs[d], cfg);
  });
  const auto index = InvertedIndex::from_keys(keys, {.hot_key_cap = 0});
  std::vector<Edge> edges;
  for (const auto& p : index.candidate_pairs(min_shared_bands)) {
    edges.push_back({p.a, p.b, static_cast<double>(p.shared) / cfg.bands});
  }
  return edges;
}

double s_curve(double s, const BandingConfig& cfg) {
  if (!(s >= 0.0 && s <= 1.0)) throw_config("s_curve needs 0 <= s <= 1");
  return 1.0 - std::pow(1.0 - std::pow(s, cfg.rows), cfg.bands);
}

void write_signatures(std::ostream& out, std::span<const MinHashSignature> sigs) {
  const std::uint32_t k = common_k(sigs);
  out.write("MHSG", 4);
  binio::put<std::uint32_t>(out, kSignatureFileVersion);
  binio::put<std::uint32_t>(out, k);
  binio::put<std::uint64_t>(out, sigs.empty() ? 0 : sigs.front().seed);
  binio::put<std::uint64_t>(out, sigs.size());
  for (const auto& s : sigs) {
    binio::put_string16(out, s.doc_id);
    for (std::uint64_t v : s.minima) binio::put<std::uint64_t>(out, v);
  }
}

void save_signatures(const std::filesystem::path& path, std::span<const MinHashSignature> sigs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write signature file " + path.string());
  write_signatures(out, sigs);
  if (!out) throw_data("failed writing signature file " + path.string());
}

std::vector<MinHashSignature> read_signatures(std::istream& in) {
  binio::expect_magic(in, "MHSG");
  const auto version = binio::get<std::uint32_t>(in, "version");
  if (version != kSignatureFileVersion) {
    throw_data("unsupported signature file version " + std::to_string(version));
  }
  const auto k = binio::get<std::uint32_t>(in, "k");
  const auto seed = binio::get<std::uint64_t>(in, "seed");
  const auto count = binio::get<std::uint64_t>(in, "count");
  std::vector<MinHashSignature> sigs;
  for (std::uint64_t d = 0; d < count; ++d) {
    MinHashSignature s;
    s.doc_id = binio::get_string16(in, "document id");
    s.k = k;
    s.seed = seed;
    s.minima.resize(k);
    for (auto& v : s.minima) v = binio::get<std::uint64_t>(in, "minima");
    sigs.push_back(std::move(s));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw_data("trailing bytes after signature records");
  return sigs;
}

std::vector<MinHashSignature> load_signatures(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open signature file " + path.string());
  return read_signatures(in);
}

}  // namespace neardup
