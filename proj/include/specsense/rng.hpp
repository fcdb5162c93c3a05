#pragma once

#include <cstdint>

namespace specsense {

/**
 * SplitMix64 generator (Steele, Lea & Flood 2014).
 *
 * Counter-style state makes streams splittable: split() derives an
 * independent child stream from the current position, so Monte Carlo
 * batches can own disjoint generators derived from one recorded seed.
 * Output is identical on every platform for a given seed.
 */
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    bool next_bernoulli(double p) { return next_double() < p; }

    /// Independent child stream seeded from this stream's next output.
    SplitMix64 split() { return SplitMix64(next_u64()); }

  private:
    std::uint64_t state_;
};

}  // namespace specsense
