#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bfpo {

/// Seeded generator with a fixed, portable draw scheme. std::mt19937_64 is
/// fully specified by the standard; the distributions here are hand-rolled
/// because the std:: ones are implementation-defined, which would break
/// bit-reproducibility of runs across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double u01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    const int k = static_cast<int>(u01() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  /// Standard normal via Box-Muller; consumes two u01 draws per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = u01();
    while (u == 0.0) u = u01();
    const double v = u01();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 6.283185307179586476925286766559 * v;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double p) { return u01() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace bfpo
