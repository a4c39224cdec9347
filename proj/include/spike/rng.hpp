#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace spike {

/// Philox4x32-10 counter-based generator. A (seed, stream) pair selects an
/// independent stream; draws depend only on how many values were consumed,
/// so parallel replications can each own a stream and stay reproducible.
class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0, 0, static_cast<std::uint32_t>(stream),
             static_cast<std::uint32_t>(stream >> 32)} {}

  std::uint32_t next32() {
    if (idx_ == 4) {
      block_ = generate(ctr_, key_);
      bump_counter();
      idx_ = 0;
    }
    return block_[idx_++];
  }

  std::uint64_t next64() {
    const std::uint64_t lo = next32();
    const std::uint64_t hi = next32();
    return (hi << 32) | lo;
  }

  /// Uniform on (0, 1], 53-bit resolution.
  double uniform() {
    return static_cast<double>((next64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes uniforms in pairs.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Chi-square(1) draw standardised to mean 0, variance 1.
  double chisq1_standardised() {
    const double z = normal();
    return (z * z - 1.0) / std::sqrt(2.0);
  }

  /// Uniform integer in [0, n).
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>(next64() % n);
  }

  static std::array<std::uint32_t, 4> generate(std::array<std::uint32_t, 4> c,
                                               std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k[0] += 0x9E3779B9u;
        k[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = 0xD2511F53ull * c[0];
      const std::uint64_t p1 = 0xCD9E8D57ull * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
           static_cast<std::uint32_t>(p0)};
    }
    return c;
  }

 private:
  void bump_counter() {
    if (++ctr_[0] == 0) ++ctr_[1];  // stream words stay untouched
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> block_{};
  int idx_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace spike
