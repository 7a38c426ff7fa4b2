#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace crowdteach {

// 64-bit finalizer from splitmix64; the basis of every stream in the project.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives a stream key from (master seed, purpose tag, indices). Streams with
/// different tags or indices are independent, so adding a new consumer never
/// shifts the draws of an existing one.
inline std::uint64_t derive_key(std::uint64_t master, std::string_view tag,
                                std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t k = mix64(master ^ 0xA24BAED4963EE407ull);
  for (char c : tag) {
    k = mix64(k ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
  }
  for (std::uint64_t id : indices) {
    k = mix64(k ^ id);
  }
  return k;
}

/// Reinterprets a double's bits for use as a derivation index.
inline std::uint64_t double_bits(double v) {
  std::uint64_t b = 0;
  std::memcpy(&b, &v, sizeof(b));
  return b;
}

/// Counter-based random stream: draw i is mix64(key + i * golden), so the
/// sequence is a pure function of the key and the draw count.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ull);
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard Gaussian via Box-Muller; the second variate of each pair is
  /// cached, so draws stay deterministic per stream.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.141592653589793238462643 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Unbiased uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t bound = (~0ull / n) * n;
    std::uint64_t v = next_u64();
    while (v >= bound) v = next_u64();
    return v % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline RandomStream derive_stream(std::uint64_t master, std::string_view tag,
                                  std::initializer_list<std::uint64_t> indices = {}) {
  return RandomStream(derive_key(master, tag, indices));
}

/// First k entries of a random permutation of [0, n), by partial Fisher-Yates.
inline std::vector<int> sample_without_replacement(int n, int k, RandomStream& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (k > n) k = n;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

inline void shuffle_indices(std::vector<int>& idx, RandomStream& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace crowdteach
