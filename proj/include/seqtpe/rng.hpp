#ifndef SEQTPE_RNG_HPP
#define SEQTPE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace seqtpe {

/// Philox4x32-10 counter-based generator (constants from Salmon et al.).
///
/// A generator instance is addressed by (seed, stream, index). The Monte
/// Carlo uses index = cycle number, so every cycle owns an independent
/// substream and the merged output does not depend on how cycles are
/// partitioned over workers. All distribution transforms below are written
/// out explicitly; nothing is delegated to implementation-defined stdlib
/// distributions, so identical seeds give identical streams everywhere.
class Philox {
 public:
  static constexpr std::uint32_t kCycleStream = 1;
  static constexpr std::uint32_t kPhaseStream = 2;
  static constexpr std::uint32_t kTestStream = 7;

  Philox(std::uint64_t seed, std::uint32_t stream, std::uint64_t index)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32) ^ (stream * 0x9E3779B9u)),
        ctr2_(static_cast<std::uint32_t>(index)),
        ctr3_(static_cast<std::uint32_t>(index >> 32)) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return out_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1); never returns an exact endpoint.
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  /// Exponential with the given mean, strictly positive.
  double exponential(double mean) { return -mean * std::log(uniform_open01()); }

  /// Zero-mean Gaussian via Box-Muller (cosine branch only, stateless).
  double gaussian(double sigma) {
    const double r = std::sqrt(-2.0 * std::log(uniform_open01()));
    const double theta = 6.283185307179586476925286766559 * uniform01();
    return sigma * r * std::cos(theta);
  }

  /// Poisson sample; Knuth multiplication for small rates, Gaussian
  /// approximation above lambda = 30 (dark-count rates per cycle are tiny,
  /// the large branch exists only to keep extreme settings safe).
  std::uint64_t poisson(double lambda) {
    if (!(lambda > 0.0)) return 0;
    if (lambda > 30.0) {
      const double v = lambda + std::sqrt(lambda) * gaussian(1.0);
      return v <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(v));
    }
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

  /// One raw 4x32 block for the given counter/key, bypassing instance state.
  /// Exposed so the known-answer vectors can be checked directly.
  static void block(const std::uint32_t ctr[4], const std::uint32_t key[2],
                    std::uint32_t out[4]) {
    std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    std::uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      if (round != 0) {
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
      }
      const std::uint64_t p0 = 0xD2511F53ull * c0;
      const std::uint64_t p1 = 0xCD9E8D57ull * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      c0 = n0;
      c1 = lo1;
      c2 = n2;
      c3 = lo0;
    }
    out[0] = c0;
    out[1] = c1;
    out[2] = c2;
    out[3] = c3;
  }

 private:
  void refill() {
    const std::uint32_t ctr[4] = {static_cast<std::uint32_t>(block_),
                                  static_cast<std::uint32_t>(block_ >> 32), ctr2_,
                                  ctr3_};
    const std::uint32_t key[2] = {key0_, key1_};
    block(ctr, key, out_);
    ++block_;
    pos_ = 0;
  }

  std::uint32_t key0_, key1_, ctr2_, ctr3_;
  std::uint64_t block_ = 0;
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int pos_ = 4;
};

}  // namespace seqtpe

#endif
