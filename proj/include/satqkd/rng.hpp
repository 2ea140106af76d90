#pragma once

#include <array>
#include <cstdint>

namespace satqkd {

/// Philox4x64-10 block function as in Random123.
std::array<std::uint64_t, 4> philox4x64_10(std::array<std::uint64_t, 4> counter, std::array<std::uint64_t, 2> key);

/// Independent random streams derived from one run seed.
enum class Stream : std::uint64_t {
    source = 1,
    channel_a,
    channel_b,
    detector_a,
    detector_b,
    basis_a,
    basis_b,
    sampling,
    relay,
};

/// Counter-based generator keyed by (seed, stream). Two generators with the
/// same key produce the same sequence regardless of what other streams do.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, Stream stream) : CounterRng(seed, static_cast<std::uint64_t>(stream)) {}
    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()();

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    bool bernoulli(double p);
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Poisson variate by sequential inversion; intended for small means.
    std::uint64_t poisson(double mean);
    std::uint8_t bit() { return static_cast<std::uint8_t>((*this)() >> 63); }

private:
    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> counter_{};
    std::array<std::uint64_t, 4> block_{};
    int used_ = 4;
};

}  // namespace satqkd
