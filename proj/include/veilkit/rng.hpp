#pragma once

#include <cstdint>
#include <cstddef>

namespace veilkit {

// xoshiro256** seeded through splitmix64. Both algorithms are published with
// exact reference code, so equal seeds give equal streams on every platform —
// unlike the standard library distributions, whose output is unspecified.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();

    // Uniform in [0, bound) by rejection from the top 64-bit range; unbiased
    // and stream-stable.
    std::uint64_t below(std::uint64_t bound);

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    // Uniform in [0, 1) with 53 random bits.
    double unit();

    // Uniform in [lo, hi].
    double uniform(double lo, double hi);

private:
    std::uint64_t state_[4];
};

} // namespace veilkit
