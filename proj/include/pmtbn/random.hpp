#pragma once

#include <cstdint>

namespace pmtbn {

/// SplitMix64 generator. This is the only randomness source in the library:
/// ground-truth generation, ancestral sampling, and test fixtures all draw
/// from it so that runs are bit-reproducible across platforms.
class SplitMix64 {
  public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next_u64() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// u = next_u64 / 2^64. The conversion to double rounds to nearest, so
    /// outputs within 2^-54 of one come back as exactly 1.0.
    constexpr double next_unit() noexcept {
        return static_cast<double>(next_u64()) * 0x1.0p-64;
    }

    /// Like next_unit() but redraws the (astronomically rare) exact zero.
    constexpr double next_open_unit() noexcept {
        double u = 0.0;
        while (u == 0.0) u = next_unit();
        return u;
    }

  private:
    std::uint64_t state_;
};

}  // namespace pmtbn
