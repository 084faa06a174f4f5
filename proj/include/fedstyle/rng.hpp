#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fedstyle {

// Deterministic random stream. mt19937_64 is fully specified by the
// standard, but the <random> distributions are not, so every draw here
// is hand-rolled on top of raw 64-bit outputs. Streams derived from the
// same (seed, tags...) are identical across platforms and runs.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : gen_(seed) {}

  // Substream derivation: hash-combine the parent seed with tag words.
  // Used to give every (client, round), class shuffle etc. its own
  // independent stream so results never depend on call order.
  static Rng derive(uint64_t seed, std::initializer_list<uint64_t> tags) {
    uint64_t h = splitmix(seed);
    for (uint64_t t : tags) h = splitmix(h ^ (t + 0x9e3779b97f4a7c15ULL));
    return Rng(h);
  }

  uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased-enough bounded draw (Lemire multiply-shift).
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  // Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Marsaglia-Tsang gamma sampler, shape alpha > 0, scale 1.
  double gamma(double alpha) {
    if (alpha < 1.0) {
      double u = 1.0 - uniform();  // (0, 1]
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    double d = alpha - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = 1.0 - uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Symmetric Dirichlet(alpha) over k buckets.
  std::vector<double> dirichlet(double alpha, int k) {
    std::vector<double> g(k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      g[i] = gamma(alpha);
      sum += g[i];
    }
    if (sum <= 0.0) {  // pathologically small alpha; fall back to uniform
      for (auto& v : g) v = 1.0 / k;
      return g;
    }
    for (auto& v : g) v /= sum;
    return g;
  }

  // Fisher-Yates; std::shuffle is implementation-defined so we roll our own.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 gen_;
};

// Tag words for substream derivation; keeps (seed, purpose, ...) streams
// disjoint without stringly-typed hashing.
namespace stream {
constexpr uint64_t kData = 1;
constexpr uint64_t kSplit = 2;
constexpr uint64_t kPartition = 3;
constexpr uint64_t kInit = 4;
constexpr uint64_t kClient = 5;
constexpr uint64_t kServer = 6;
constexpr uint64_t kLocalBaseline = 7;
}  // namespace stream

}  // namespace fedstyle
