#pragma once

#include <cstdint>

namespace grf {

// Counter-based pseudo-random stream (splitmix64 over seed + counter).
// Identical seed and call sequence reproduce the same draws everywhere,
// and the (seed, counter) pair is all the state a checkpoint needs.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t counter = 0)
        : seed_(seed), counter_(counter) {}

    std::uint64_t next_u64();

    // uniform double in [0, 1)
    double uniform();

    // standard normal via Box-Muller; consumes two u64 draws
    double normal();

    // uniform integer in [0, bound), bound >= 1; rejection sampled
    std::uint64_t uniform_below(std::uint64_t bound);

    // independent stream derived from a seed and a purpose tag
    static RngStream derive(std::uint64_t seed, std::uint64_t tag);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

} // namespace grf
