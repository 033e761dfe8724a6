#pragma once

#include <cstdint>
#include <random>

namespace fdqn {

// Seeded RNG used everywhere randomness is needed. Every draw goes through
// one engine instance so a fixed seed reproduces a run bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(static_cast<std::mt19937_64::result_type>(seed)) {}

  // Inclusive range [lo, hi].
  int uniform_int(int lo, int hi) {
    std::uniform_int_distribution<int> dist(lo, hi);
    return dist(engine_);
  }

  // Half-open [0, 1).
  double uniform_real() {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(engine_);
  }

  double uniform_real(double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fdqn
