#ifndef KNEESEG_RANDOM_HPP
#define KNEESEG_RANDOM_HPP

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// Counter-based: every draw is a pure function of (seed, stream, counter), so
// output does not depend on evaluation order, thread count or platform.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace kneeseg {

using Philox4x32 = std::array<std::uint32_t, 4>;

inline Philox4x32 philox4x32_10(Philox4x32 ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

/// Named draw streams keep unrelated consumers of one seed independent.
enum class Stream : std::uint32_t {
  PhantomLayout = 1,
  PhantomNoise = 2,
  Augment = 3,
  Prediction = 4,
  Test = 99,
};

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream, std::uint64_t start = 0)
      : seed_(seed), stream_(static_cast<std::uint32_t>(stream)), counter_(start) {}

  /// Block `counter` of this stream, as two 64-bit words.
  std::array<std::uint64_t, 2> block(std::uint64_t counter) const {
    const Philox4x32 out = philox4x32_10(
        {static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32), stream_, 0u},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    return {(static_cast<std::uint64_t>(out[0]) << 32) | out[1],
            (static_cast<std::uint64_t>(out[2]) << 32) | out[3]};
  }

  /// Uniform in [0, 1) with 53 random bits.
  static double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

  /// Standard normal from block `counter` (Box-Muller, cosine branch).
  double normal_at(std::uint64_t counter) const {
    const auto b = block(counter);
    const double u1 = 1.0 - to_unit(b[0]);  // (0, 1]
    const double u2 = to_unit(b[1]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double uniform() {
    if (!spare_valid_) {
      const auto b = block(counter_++);
      spare_ = b[1];
      spare_valid_ = true;
      return to_unit(b[0]);
    }
    spare_valid_ = false;
    return to_unit(spare_);
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t seed_;
  std::uint32_t stream_;
  std::uint64_t counter_;
  std::uint64_t spare_ = 0;
  bool spare_valid_ = false;
};

}  // namespace kneeseg

#endif  // KNEESEG_RANDOM_HPP
