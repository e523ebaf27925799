// Counter-based random number streams.
//
// Every draw is a pure function of (seed, stream_id, counter), computed with
// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// The 64-bit seed is the Philox key; the counter block is
// (draw_lo, draw_hi, stream_lo, stream_hi). Distribution sampling is done
// here rather than through <random> distributions, whose algorithms are
// implementation-defined, so a given (seed, stream_id) yields the same
// sequence with any standard library.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace oppbandit {

namespace philox {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr Block round(const Block& c, const Key& k) noexcept {
  const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
  const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

/// Philox4x32 with 10 rounds.
constexpr Block philox4x32_10(Block ctr, Key key) noexcept {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    ctr = round(ctr, key);
  }
  return ctr;
}

}  // namespace philox

/// Deterministic stream of random draws identified by (seed, stream_id).
///
/// Sequential draws advance an internal counter. `bits_at` gives random
/// access to the same keyed function, which lets a replication address a
/// value (e.g. the reward of arm k at slot t) independently of the order in
/// which other values were consumed.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t position() const noexcept { return counter_ * 2 + (have_spare_ ? 1 : 0); }

  /// Next 64 random bits.
  result_type operator()() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto b = block(counter_++);
    spare_ = join(b[2], b[3]);
    have_spare_ = true;
    return join(b[0], b[1]);
  }

  /// 64 random bits at an absolute index, without touching the sequential state.
  result_type bits_at(std::uint64_t index) const noexcept {
    const auto b = block(index);
    return join(b[0], b[1]);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return to_unit((*this)()); }
  double uniform_at(std::uint64_t index) const noexcept { return to_unit(bits_at(index)); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal by Box-Muller (cosine branch only; one normal per call).
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang, with the U^(1/a) boost for shape < 1.
  double gamma(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
      throw std::invalid_argument("gamma shape must be positive and finite");
    }
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(1.0 - uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = 1.0 - uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

 private:
  philox::Block block(std::uint64_t index) const noexcept {
    const philox::Block ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                            static_cast<std::uint32_t>(stream_id_),
                            static_cast<std::uint32_t>(stream_id_ >> 32)};
    const philox::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    return philox::philox4x32_10(ctr, key);
  }

  static constexpr std::uint64_t join(std::uint32_t lo, std::uint32_t hi) noexcept {
    return std::uint64_t{lo} | (std::uint64_t{hi} << 32);
  }

  static constexpr double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
};

/// What a stream is used for inside one replication.
enum class StreamRole : std::uint64_t { kLoad = 1, kReward = 2, kPolicy = 3, kAux = 4 };

/// Stream id for (replication, policy slot, role). Slot 0 is the environment,
/// shared by every policy so that all policies face the same loads and rewards.
constexpr std::uint64_t make_stream_id(std::uint64_t replication, std::uint64_t policy_slot,
                                       StreamRole role) noexcept {
  return (replication << 24) | ((policy_slot & 0xFFFFFu) << 4) | static_cast<std::uint64_t>(role);
}

}  // namespace oppbandit
