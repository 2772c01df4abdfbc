#ifndef NKLAB_RNG_HPP
#define NKLAB_RNG_HPP

// Deterministic random streams. We deliberately avoid
// std::uniform_real_distribution (its output is implementation-defined) and
// map raw mt19937_64 words to doubles ourselves, so identical seeds give
// bit-identical samples on every platform. Substreams are derived from a
// parent seed and a text label via splitmix64/FNV-1a mixing, which keeps the
// per-check sample sequences independent of how many draws other checks made.

#include <cstdint>
#include <random>
#include <string_view>

namespace nklab {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Child stream whose seed depends only on (parent seed, label).
  RngStream fork(std::string_view label) const {
    return RngStream(detail::splitmix64(seed_ ^ detail::fnv1a64(label)));
  }

  // Indexed child stream, for per-sample substreams.
  RngStream fork(std::string_view label, std::uint64_t index) const {
    return RngStream(detail::splitmix64(
        detail::splitmix64(seed_ ^ detail::fnv1a64(label)) + index));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits; platform-independent.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo is fine here: n is tiny (< 2^20) in all uses, the
    // bias is ~2^-44 and determinism is what matters.
    return gen_() % n;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace nklab

#endif
