#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qpoly {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct RngSeed {
  std::uint64_t value = 0;

  /// Independent child stream, e.g. one per repetition or chain.
  RngSeed derive(std::uint64_t index) const {
    return {splitmix64(value ^ splitmix64(index + 0x632be59bd9b4e019ULL))};
  }
};

/// Reproducible random stream. Only the engine comes from <random>; the
/// distributions are written out here because the standard ones are
/// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64(splitmix64 seed); u53 uniforms; box-muller normals; v1";

  explicit Rng(RngSeed seed) : engine_(splitmix64(seed.value)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qpoly
