#include "grf/rng.hpp"

#include <cmath>

#include "grf/error.hpp"

namespace grf {

namespace {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t RngStream::next_u64() {
    ++counter_;
    return splitmix64(seed_ + counter_ * 0x9e3779b97f4a7c15ULL);
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    // Box-Muller; u1 shifted away from 0 so log stays finite
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw ParamError("uniform_below: bound must be >= 1");
    if (bound == 1) return 0;
    std::uint64_t threshold = (0ULL - bound) % bound; // 2^64 mod bound
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold) return r % bound;
    }
}

RngStream RngStream::derive(std::uint64_t seed, std::uint64_t tag) {
    return RngStream(splitmix64(seed ^ splitmix64(tag + 0x9e3779b97f4a7c15ULL)));
}

} // namespace grf
