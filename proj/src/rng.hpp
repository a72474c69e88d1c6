#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace prefts {

// All randomness in the project flows through Rng. Samplers are written out
// explicitly (instead of std:: distributions, whose output is
// implementation-defined) so that a seed pins every draw bit-for-bit on any
// platform. mt19937_64 itself is fully specified by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller. Two uniforms per draw, no cached spare,
  // so consumption per call is fixed.
  double gaussian() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Index i with probability probs[i]. CDF inversion in fixed order; assumes
  // probs sums to ~1 and falls back to the last index on roundoff overshoot.
  int categorical(std::span<const double> probs) {
    double u = uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  // Flat Dirichlet over k categories: normalized iid Exp(1) draws.
  std::vector<double> dirichlet_flat(int k) {
    std::vector<double> g(k);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      g[i] = -std::log(1.0 - uniform01());
      total += g[i];
    }
    for (int i = 0; i < k; ++i) g[i] /= total;
    return g;
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace detail

// Derives an independent stream seed from a root seed and a purpose tag
// ("mdp", "class", "algorithm", "preference", ...). Changing the draws made
// under one purpose never perturbs the others.
inline std::uint64_t substream_seed(std::uint64_t root, std::string_view purpose) {
  return detail::splitmix64(root ^ detail::fnv1a64(purpose));
}

inline Rng substream(std::uint64_t root, std::string_view purpose) {
  return Rng(substream_seed(root, purpose));
}

}  // namespace prefts
