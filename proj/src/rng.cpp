#include "satqkd/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace satqkd {

namespace {

__extension__ typedef unsigned __int128 u128;

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const u128 p = static_cast<u128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64_10(std::array<std::uint64_t, 4> ctr, std::array<std::uint64_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

CounterRng::result_type CounterRng::operator()() {
    if (used_ == 4) {
        for (auto& word : counter_) {
            if (++word != 0) {
                break;
            }
        }
        block_ = philox4x64_10(counter_, key_);
        used_ = 0;
    }
    return block_[used_++];
}

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

bool CounterRng::bernoulli(double p) { return uniform() < p; }

std::uint64_t CounterRng::below(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("CounterRng::below: n must be positive");
    }
    // Lemire's nearly divisionless rejection method.
    u128 m = static_cast<u128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<u128>((*this)()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t CounterRng::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("CounterRng::poisson: mean must be finite and non-negative");
    }
    if (mean > 30.0) {
        // Sum of independent Poisson variates keeps inversion well conditioned.
        const double half = 0.5 * mean;
        return poisson(half) + poisson(half);
    }
    const double u = uniform();
    double term = std::exp(-mean);
    double cdf = term;
    std::uint64_t k = 0;
    while (u >= cdf && term > 0.0) {
        ++k;
        term *= mean / static_cast<double>(k);
        cdf += term;
    }
    return k;
}

}  // namespace satqkd
