#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace jointdep {

/// Inverse of the standard normal CDF (Wichura's PPND16 rational
/// approximation, accurate to ~1e-16 over (0,1)).
double inverse_normal_cdf(double p);

/// Standard normal CDF via erfc.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Standard normal density.
inline double normal_pdf(double x) {
    static const double kInvSqrt2Pi = 0.39894228040143267794;
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// Counter-style SplitMix64 stream. child(i) derives a statistically
// independent substream, so worker threads can draw for replicate i without
// sharing state and the draw sequence never depends on scheduling order.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : state_(mix(seed ^ kDomainSalt)) {}

    RngStream child(std::uint64_t index) const {
        RngStream s(0);
        s.state_ = mix(state_ ^ mix(index + kChildSalt));
        return s;
    }

    /// Deterministic 64-bit seed for a derived component (candidate, replicate...).
    std::uint64_t fork_seed(std::uint64_t index) const { return mix(state_ ^ mix(index + kForkSalt)); }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform draw on the open interval (0,1).
    double next_uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double next_normal() { return inverse_normal_cdf(next_uniform()); }

    double next_exponential(double mean) { return -mean * std::log(next_uniform()); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * bound) >> 64);
    }

  private:
    static constexpr std::uint64_t kDomainSalt = 0xA02B8C1C55F7D34Bull;
    static constexpr std::uint64_t kChildSalt = 0x6C62272E07BB0142ull;
    static constexpr std::uint64_t kForkSalt = 0x27D4EB2F165667C5ull;

    // SplitMix64 output mixer.
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace jointdep
