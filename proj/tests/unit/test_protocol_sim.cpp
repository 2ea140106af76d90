#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gen.hpp"
#include "satqkd/errors.hpp"
#include "satqkd/protocol_sim.hpp"

using namespace satqkd;

namespace {

Bbm92System system(double intrinsic, double window_s) {
    Bbm92System s;
    s.source.pair_rate_cps = 1e6;
    s.source.intrinsic_qber = intrinsic;
    s.det_a.efficiency = 1.0;
    s.det_a.jitter_rms_s = 0.0;
    s.det_a.dead_time_s = 0.0;
    s.det_a.dark_fit_a_cps = 0.0;
    s.det_a.dark_fit_c_cps = 0.0;
    s.det_b = s.det_a;
    s.window_s = window_s;
    s.link_loss_share_a = 0.0;
    return s;
}

bool within(double measured, double expected, double sigma, double k = 3.0) {
    return std::abs(measured - expected) <= k * sigma;
}

PartyRecord record(std::initializer_list<int> bases, std::initializer_list<int> bits,
                   std::initializer_list<int> detected) {
    PartyRecord r;
    auto b = bases.begin();
    auto v = bits.begin();
    double t = 0.0;
    for (int d : detected) {
        r.push(static_cast<std::uint8_t>(*b++), static_cast<std::uint8_t>(*v++), d != 0, t);
        t += 1e-6;
    }
    return r;
}

SiftedKey key_of(const BitString& bits) {
    SiftedKey k;
    k.bits = bits;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        k.source_indices.push_back(i);
    }
    return k;
}

}  // namespace

TEST_CASE("noise-free lossless BBM92 gives identical sifted keys") {
    const auto run = simulate_bbm92(100000, system(0.0, 0.0), Decibels{0.0}, Decibels{0.0}, 3);
    const auto& r = run.report;
    CHECK(r.coincidences == 100000);
    CHECK(r.accidental_coincidences == 0);
    CHECK(r.sifted_errors == 0);
    CHECK(r.measured_qber == 0.0);
    const double ratio = static_cast<double>(r.sifted_length) / static_cast<double>(r.coincidences);
    CHECK(within(ratio, 0.5, std::sqrt(0.25 / 1e5)));
    const auto [ka, kb] = sift(run.alice, run.bob);
    CHECK(ka.bits == kb.bits);
    CHECK(ka.size() == r.sifted_length);
}

TEST_CASE("intrinsic error is reproduced") {
    const auto r = simulate_bbm92(1000000, system(0.015, 0.0), Decibels{0.0}, Decibels{0.0}, 5).report;
    const double sigma = std::sqrt(0.015 * 0.985 / static_cast<double>(r.sifted_length));
    CHECK(within(r.measured_qber, 0.015, sigma));
}

TEST_CASE("Monte Carlo agrees with the analytic model") {
    Bbm92System s = system(0.015, 2e-9);
    s.det_a.dark_fit_a_cps = s.det_b.dark_fit_a_cps = 1790.0;
    s.det_a.dark_fit_c_cps = s.det_b.dark_fit_c_cps = -81.0;
    for (double loss : {10.0, 30.0}) {
        const auto expected = evaluate(s, Decibels{loss});
        const auto r = simulate_bbm92(1000000, s, Decibels{0.0}, Decibels{loss}, 17).report;
        const double t = r.duration_s;
        const double rate = expected.true_coincidences_cps + expected.accidental_coincidences_cps;
        CHECK(within(r.coincidence_rate_cps(), rate, std::sqrt(rate * t) / t));
        const double sigma = std::sqrt(expected.qber * (1.0 - expected.qber) / static_cast<double>(r.sifted_length));
        CHECK(within(r.measured_qber, expected.qber, sigma));
        CHECK(r.true_coincidences + r.accidental_coincidences == r.coincidences);
        CHECK(r.sifted_length <= r.coincidences);
    }
}

TEST_CASE("runs are deterministic in the seed") {
    const Bbm92System s = system(0.02, 2e-9);
    const auto a = simulate_bbm92(20000, s, Decibels{0.0}, Decibels{10.0}, 99);
    const auto b = simulate_bbm92(20000, s, Decibels{0.0}, Decibels{10.0}, 99);
    const auto c = simulate_bbm92(20000, s, Decibels{0.0}, Decibels{10.0}, 100);
    std::ostringstream sa, sb;
    write_csv(sa, a.report);
    write_csv(sb, b.report);
    CHECK(sa.str() == sb.str());
    CHECK(a.alice.bits == b.alice.bits);
    CHECK(a.bob.timestamps_s == b.bob.timestamps_s);
    CHECK(a.alice.bits != c.alice.bits);
}

TEST_CASE("BB84 gain and error") {
    WcpSourceParams src;
    src.mean_photon_signal = 0.5;
    src.mean_photon_decoy = 0.1;
    src.signal_fraction = 1.0;
    DetectorParams det;
    det.efficiency = 1.0;
    det.dark_fit_a_cps = 0.0;
    det.dark_fit_c_cps = 0.0;
    const std::uint64_t n = 1000000;
    const auto r = simulate_bb84(n, src, Decibels{0.0}, det, {}, 2e-9, 0.0, 8).report;
    const double gain = r.per_intensity_gain.at(0.5);
    const double g0 = 1.0 - std::exp(-0.5);
    CHECK(g0 == doctest::Approx(0.3935).epsilon(1e-4));
    CHECK(within(gain, g0, std::sqrt(g0 * (1.0 - g0) / n)));
    CHECK(r.measured_qber == 0.0);
    CHECK(r.sifted_errors == 0);

    src.signal_fraction = 0.5;
    const BackgroundLight bg{1000.0};
    const auto mixed = simulate_bb84(n, src, Decibels{6.4}, det, bg, 2e-9, 0.01, 9).report;
    const auto expect = bb84_expectation(src, Decibels{6.4}, det, bg, 2e-9, 0.01);
    CHECK(mixed.per_intensity_gain.at(0.1) < mixed.per_intensity_gain.at(0.5));
    const double half = n / 2.0;
    CHECK(within(mixed.per_intensity_gain.at(0.5), expect.gain_signal,
                 std::sqrt(expect.gain_signal * (1.0 - expect.gain_signal) / half), 4.0));
    CHECK(within(mixed.per_intensity_gain.at(0.1), expect.gain_decoy,
                 std::sqrt(expect.gain_decoy * (1.0 - expect.gain_decoy) / half), 4.0));
    CHECK(within(mixed.measured_qber, expect.qber,
                 std::sqrt(expect.qber * (1.0 - expect.qber) / static_cast<double>(mixed.sifted_length))));
}

TEST_CASE("analytic gain") {
    CHECK(analytic_gain(0.5, 1.0, 0.0) == doctest::Approx(1.0 - std::exp(-0.5)));
    CHECK(analytic_gain(0.5, 0.0, 0.0) == 0.0);
    CHECK(analytic_gain(0.0, 1.0, 0.01) == doctest::Approx(0.01));
}

TEST_CASE("sifting") {
    const auto a = record({0, 0, 1, 1}, {1, 0, 1, 0}, {1, 1, 1, 1});
    const auto b = record({0, 1, 1, 0}, {1, 1, 0, 0}, {1, 1, 1, 1});
    const auto [ka, kb] = sift(a, b);
    CHECK(ka.source_indices == std::vector<std::size_t>{0, 2});
    CHECK(ka.bits == BitString{1, 1});
    CHECK(kb.bits == BitString{1, 0});

    const auto quiet = record({0, 0}, {0, 0}, {0, 0});
    CHECK(sift(quiet, quiet).first.size() == 0);

    const auto one_sided = record({0, 0}, {1, 1}, {1, 0});
    const auto other = record({0, 0}, {1, 1}, {0, 1});
    CHECK(sift(one_sided, other).first.size() == 0);

    CHECK_THROWS_AS(sift(a, quiet), std::invalid_argument);
}

TEST_CASE("random basis choices keep about half the detections") {
    gen::Source g(71);
    PartyRecord a;
    PartyRecord b;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        a.push(g.coin(), g.coin(), true, i);
        b.push(g.coin(), g.coin(), true, i);
    }
    const double kept = static_cast<double>(sift(a, b).first.size());
    CHECK(within(kept / n, 0.5, std::sqrt(0.25 / n)));
}

TEST_CASE("sifted keys are aligned subsets") {
    gen::for_all(100, 72, [](gen::Source& g) {
        PartyRecord a;
        PartyRecord b;
        const auto n = g.integer(0, 300);
        for (std::uint64_t i = 0; i < n; ++i) {
            a.push(g.coin(), g.coin(), g.coin(), static_cast<double>(i));
            b.push(g.coin(), g.coin(), g.coin(), static_cast<double>(i));
        }
        const auto [ka, kb] = sift(a, b);
        CHECK(ka.size() == kb.size());
        CHECK(ka.source_indices == kb.source_indices);
        for (std::size_t j = 0; j < ka.size(); ++j) {
            const auto i = ka.source_indices[j];
            CHECK(a.bases[i] == b.bases[i]);
            CHECK(a.detected[i]);
            CHECK(b.detected[i]);
            CHECK(ka.bits[j] == a.bits[i]);
            CHECK(kb.bits[j] == b.bits[i]);
        }
    });
}

TEST_CASE("parameter estimation") {
    gen::Source g(73);
    BitString bits;
    for (int i = 0; i < 10000; ++i) {
        bits.push_back(g.coin());
    }
    BitString flipped = bits;
    for (auto& b : flipped) {
        b ^= 1;
    }
    BitString planted = bits;
    for (std::size_t i = 0; i < planted.size(); i += 20) {
        planted[i] ^= 1;
    }
    const auto same = estimate_qber(key_of(bits), key_of(bits), 0.1, 1);
    CHECK(same.estimate == 0.0);
    CHECK(same.sample_size == 1000);
    CHECK(same.remaining_a.size() == 9000);
    CHECK(same.remaining_a.bits == same.remaining_b.bits);

    CHECK(estimate_qber(key_of(bits), key_of(flipped), 0.1, 1).estimate == 1.0);

    const auto p = estimate_qber(key_of(bits), key_of(planted), 0.2, 2);
    CHECK(within(p.estimate, 0.05, std::sqrt(0.05 * 0.95 / 2000.0)));

    CHECK_THROWS_AS(estimate_qber(key_of({1, 0, 1}), key_of({1, 0, 1}), 0.1, 1), EstimationError);
    CHECK_THROWS_AS(estimate_qber(key_of(bits), key_of(bits), 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_qber(key_of(bits), key_of(bits), 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_qber(key_of({1, 0}), key_of({1}), 0.5, 1), std::invalid_argument);
}

TEST_CASE("estimation removes the sample without reordering the rest") {
    gen::for_all(50, 74, [](gen::Source& g) {
        BitString bits;
        const auto n = g.integer(10, 500);
        for (std::uint64_t i = 0; i < n; ++i) {
            bits.push_back(g.coin());
        }
        const auto e = estimate_qber(key_of(bits), key_of(bits), g.uniform(0.1, 0.9), g.integer(0, 1000));
        CHECK(e.sample_size + e.remaining_a.size() == bits.size());
        const auto& idx = e.remaining_a.source_indices;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            CHECK(e.remaining_a.bits[j] == bits[idx[j]]);
            if (j > 0) {
                CHECK(idx[j] > idx[j - 1]);
            }
        }
    });
}

TEST_CASE("run report CSV") {
    RunReport r;
    r.protocol = Protocol::bb84;
    r.n_slots = 10;
    r.per_intensity_gain = {{0.1, 0.25}, {0.5, 0.5}};
    r.seed = 12;
    std::ostringstream os;
    write_csv(os, r);
    const std::string s = os.str();
    CHECK(s.rfind("protocol,n_slots,duration_s,detections_a,detections_b,coincidences,true_coincidences,"
                  "accidental_coincidences,sifted_length,sifted_errors,measured_qber,per_intensity_gain,seed\n",
                  0) == 0);
    CHECK(s.find("bb84,10,") != std::string::npos);
    CHECK(s.find("0.1:0.25;0.5:0.5,12") != std::string::npos);
    CHECK(std::string(to_string(Protocol::bbm92)) == "bbm92");
}
