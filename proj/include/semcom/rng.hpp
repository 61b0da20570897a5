#pragma once

#include <cmath>
#include <cstdint>

namespace semcom {

/// Counter-based SplitMix64 generator with hierarchical substreams.
///
/// Every consumer derives its own stream from a (seed, tag...) path, so the
/// draw sequence of one stream never depends on how many values another
/// stream consumed. This is what makes trial workers schedule-independent:
/// transmitting view 7 before view 3 yields the same bytes as the reverse.
///
/// Output i of a stream with key k is splitmix64_finalize(k + (i+1)*GAMMA),
/// i.e. plain SplitMix64 seeded at the derived key.
class Rng {
public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  /// Derive an independent child stream. Tags are mixed in order, so
  /// substream(a).substream(b) != substream(b).substream(a).
  [[nodiscard]] Rng substream(std::uint64_t tag) const {
    return Rng(finalize(key_ ^ finalize(tag + kStreamSalt)));
  }
  [[nodiscard]] Rng substream(std::uint64_t a, std::uint64_t b) const {
    return substream(a).substream(b);
  }
  [[nodiscard]] Rng substream(std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) const {
    return substream(a).substream(b).substream(c);
  }

  std::uint64_t next_u64() { return finalize(key_ + (++counter_) * kGamma); }

  /// Uniform in [0,1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per pair.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    // avoid log(0)
    while (u1 == 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kStreamSalt = 0xA3EC647659359ACDull;

  static constexpr std::uint64_t finalize(std::uint64_t z) {
    z += kGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace semcom
