#ifndef PERSONA_PONG_RNG_H_
#define PERSONA_PONG_RNG_H_

#include <cstdint>

namespace persona_pong {

// splitmix64 stream. Every random draw in the project goes through this type
// so results do not depend on the standard library's distributions.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed = 0) : state_(seed) {}

  uint64_t Next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). n must be positive.
  uint64_t Below(uint64_t n) {
    // Lemire's multiply-shift with rejection keeps the draw unbiased.
    unsigned __int128 m = static_cast<unsigned __int128>(Next()) * n;
    uint64_t low = static_cast<uint64_t>(m);
    if (low < n) {
      const uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(Next()) * n;
        low = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  uint64_t state() const { return state_; }
  void set_state(uint64_t s) { state_ = s; }

  friend bool operator==(const SplitMix64&, const SplitMix64&) = default;

 private:
  uint64_t state_;
};

// Derives the seed of the index-th item of a run from a base seed. Serial and
// parallel executions use the same derivation, so results merge by index.
inline uint64_t DeriveSeed(uint64_t base, uint64_t index) {
  SplitMix64 mix(base ^ (0xd1b54a32d192ed03ULL * (index + 1)));
  mix.Next();
  return mix.Next();
}

}  // namespace persona_pong

#endif  // PERSONA_PONG_RNG_H_
