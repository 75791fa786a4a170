#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "neardup/corpus.hpp"
#include "neardup/overlap.hpp"

namespace neardup {

/// Value of every coordinate of the signature of an empty set.
inline constexpr std::uint64_t kEmptyMinimum = std::numeric_limits<std::uint64_t>::max();

struct MinHashSignature {
  std::string doc_id;
  std::uint32_t k = 0;
  std::vector<std::uint64_t> minima;
  std::uint64_t seed = 0;

  /// True for the signature of an empty shingle set.
  bool empty() const noexcept;

  friend bool operator==(const MinHashSignature&, const MinHashSignature&) = default;
};

/// The i-th hash function is h_i(x) = fmix64(x ^ key_i) with
/// key_i = derive_seed(seed, i); each h_i permutes the 64-bit space.
class MinHasher {
 public:
  MinHasher(std::uint32_t k, std::uint64_t seed);

  std::uint32_t k() const noexcept { return static_cast<std::uint32_t>(keys_.size()); }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t hash(std::uint32_t i, std::uint64_t x) const noexcept;

  MinHashSignature sign(const ShingleSet& s) const;

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> keys_;
};

MinHashSignature minhash(const ShingleSet& s, std::uint32_t k, std::uint64_t seed);
std::vector<MinHashSignature> minhash_all(std::span<const ShingleSet> sets, std::uint32_t k,
                                          std::uint64_t seed);

/// Number of coordinates on which the two signatures agree.
std::uint32_t agreement(const MinHashSignature& a, const MinHashSignature& b);
double collision_fraction(const MinHashSignature& a, const MinHashSignature& b);

/// Pairs agreeing on at least `min_collisions` coordinates, scored by the
/// agreeing fraction. Signatures of empty sets never collide.
std::vector<Edge> collision_lsh(std::span<const MinHashSignature> sigs, std::uint32_t min_collisions);

struct BandingConfig {
  std::uint32_t bands = 15;
  std::uint32_t rows = 2;

  /// Throws unless bands, rows >= 1 and bands * rows <= k.
  void validate(std::uint32_t k) const;
};

/// XXH64 over the little-endian bytes of the band's rows, seeded with the
/// band number.
std::uint64_t band_hash(std::span<const std::uint64_t> rows, std::uint32_t band);

/// Band bucket keys of one signature, one per band.
std::vector<IndexKey> band_keys(const MinHashSignature& sig, const BandingConfig& cfg);

/// Pairs sharing at least `min_shared_bands` band buckets (1 by default),
/// scored by the fraction of shared bands. Signatures of empty sets are
/// never bucketed.
std::vector<Edge> banded_lsh(std::span<const MinHashSignature> sigs, const BandingConfig& cfg,
                             std::uint32_t min_shared_bands = 1);

/// Probability that banded LSH emits a pair of Jaccard similarity s:
/// 1 - (1 - s^rows)^bands.
double s_curve(double s, const BandingConfig& cfg);

// Signature file, little-endian: "MHSG", version u32, k u32, seed u64,
// count u64, then per doc: id length u16, id bytes, k x u64 minima.
inline constexpr std::uint32_t kSignatureFileVersion = 1;
void write_signatures(std::ostream& out, std::span<const MinHashSignature> sigs);
void save_signatures(const std::filesystem::path& path, std::span<const MinHashSignature> sigs);
std::vector<MinHashSignature> read_signatures(std::istream& in);
std::vector<MinHashSignature> load_signatures(const std::filesystem::path& path);

}  // namespace neardup
