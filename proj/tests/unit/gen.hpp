#pragma once

#include <cstdint>
#include <random>

// Minimal property-test driver: `cases` draws from a fixed-seed engine.
namespace gen {

struct Source {
    explicit Source(std::uint64_t seed) : engine(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
    std::uint64_t integer(std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine);
    }
    bool coin() { return integer(0, 1) == 1; }

    std::mt19937_64 engine;
};

template <class Fn>
void for_all(int cases, std::uint64_t seed, Fn&& fn) {
    Source s(seed);
    for (int i = 0; i < cases; ++i) {
        fn(s);
    }
}

}  // namespace gen
