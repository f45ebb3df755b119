#ifndef MMIRL_RNG_HPP_
#define MMIRL_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace mmirl {

// Counter-friendly 64-bit mixer (splitmix64 finalizer). Used both as the
// core generator and to derive independent seeds from (seed, tag, index)
// tuples, so every episode/iteration gets its own stream and runs are
// reproducible regardless of worker count.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t seed_chain(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 1)));
}

inline std::uint64_t seed_chain(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return seed_chain(seed_chain(a, b), c);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  // standard normal via Box-Muller; one spare cached
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    // avoid log(0)
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double std) { return mean + std * normal(); }

  // Fisher-Yates permutation of 0..n-1
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = uniform_int(i + 1);
      std::swap(p[i], p[j]);
    }
    return p;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Samples an index from a categorical distribution by walking the CDF in
// descending-probability order (ties broken by index). Walking in sorted
// order makes the draw equivariant under permutations of the category
// labels, which the mode-relabeling symmetry checks rely on.
inline int sample_categorical(std::span<const double> probs, double u) {
  const int n = static_cast<int>(probs.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = 1; i < n; ++i) {  // insertion sort, n is tiny
    int j = i;
    while (j > 0 && (probs[order[j]] > probs[order[j - 1]] ||
                     (probs[order[j]] == probs[order[j - 1]] && order[j] < order[j - 1]))) {
      std::swap(order[j], order[j - 1]);
      --j;
    }
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += probs[order[i]];
    if (u < acc) return order[i];
  }
  return order[n - 1];
}

}  // namespace mmirl

#endif  // MMIRL_RNG_HPP_
