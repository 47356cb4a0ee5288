#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <random>

namespace mixvar {

/// splitmix64 finalizer; good avalanche, cheap.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a root seed and up to three
/// context tags (start index, family, window index, ...). Every source of
/// randomness in the library is seeded through this, so runs are
/// reproducible regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix_seed(root ^ 0x6a09e667f3bcc909ull);
  s = mix_seed(s ^ a);
  s = mix_seed(s ^ b);
  s = mix_seed(s ^ c);
  return s;
}

/// Random source with explicit seed state. Doubles come from fixed bit
/// manipulation of the raw engine output, so sequences depend only on the
/// mt19937_64 stream and not on standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on the open interval (0, 1).
  double u01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (Box-Muller, spare draw cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(u01()));
    const double theta = 2.0 * 3.14159265358979323846 * u01();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Gamma(k, 1) via Marsaglia-Tsang; k > 0.
  double gamma(double k) {
    if (k < 1.0) {
      return gamma(k + 1.0) * std::pow(u01(), 1.0 / k);
    }
    const double d = k - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x = 0.0, v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = u01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Uniform index in [0, n). Modulo bias is negligible for the small n
  /// used here (component counts, data indices).
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(gen_() % n);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mixvar
