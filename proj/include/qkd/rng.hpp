#pragma once

// Counter-based RNG streams: every pulse gets its own engine derived from
// (master seed, pulse index), so serial and parallel session execution
// produce identical results.

#include <cstdint>
#include <random>

namespace qkd {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 pulse_rng(std::uint64_t seed, std::uint64_t pulse_index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(pulse_index + 1)));
}

}  // namespace qkd
