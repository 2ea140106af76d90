#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gen.hpp"
#include "satqkd/detector.hpp"

using namespace satqkd;

namespace {

DetectorParams at(double temperature_k) {
    DetectorParams d;
    d.temperature_k = temperature_k;
    return d;
}

}  // namespace

TEST_CASE("dark count fit") {
    CHECK(dark_count_rate(at(273.15)) == 1709.0);
    CHECK(std::abs(dark_count_rate(at(288.15)) - 5862.0) <= 1.0);
    CHECK(dark_count_rate(at(288.15)) == doctest::Approx(1790.0 * std::exp(1.2) - 81.0));
    CHECK(dark_count_rate(at(230.0)) == 0.0);
}

TEST_CASE("dark counts never decrease with temperature and never go negative") {
    gen::for_all(500, 41, [](gen::Source& g) {
        const double t1 = g.uniform(200.0, 330.0);
        const double t2 = g.uniform(t1, 330.0);
        CHECK(dark_count_rate(at(t1)) >= 0.0);
        CHECK(dark_count_rate(at(t1)) <= dark_count_rate(at(t2)));
    });
}

TEST_CASE("receiver aggregation multiplies the dark rate") {
    const DetectorParams single = at(288.15);
    const DetectorParams agg = aggregate_receiver(single);
    CHECK(dark_count_rate(agg) == doctest::Approx(4.0 * dark_count_rate(single)));
    CHECK(agg.detectors_per_receiver == 1);
    CHECK(dark_count_rate(aggregate_receiver(at(230.0))) == 0.0);
}

TEST_CASE("detected rate") {
    DetectorParams d = at(273.15);
    d.dead_time_s = 0.0;
    CHECK(detected_rate(0.0, d) == 1709.0);

    d.dead_time_s = 26e-9;
    CHECK(detected_rate(std::numeric_limits<double>::infinity(), d) / 1e6 == doctest::Approx(38.46).epsilon(0.01 / 38.46));

    DetectorParams quiet;
    quiet.dark_fit_a_cps = 0.0;
    quiet.dark_fit_c_cps = 0.0;
    quiet.efficiency = 0.5;
    quiet.dead_time_s = 26e-9;
    CHECK(detected_rate(1e6, quiet) == doctest::Approx(5e5 / (1.0 + 5e5 * 26e-9)));
    CHECK(detected_rate(1e6, quiet) / 1e3 == doctest::Approx(493.6).epsilon(1e-4));
    CHECK_THROWS_AS(detected_rate(-1.0, quiet), std::invalid_argument);
}

TEST_CASE("detected rate is bounded by saturation and monotone in the incident rate") {
    gen::for_all(500, 42, [](gen::Source& g) {
        DetectorParams d = at(g.uniform(200.0, 330.0));
        d.dead_time_s = g.uniform(1e-9, 100e-9);
        d.efficiency = g.uniform(0.05, 1.0);
        const double a = std::pow(10.0, g.uniform(0.0, 10.0));
        const double b = a * g.uniform(1.0, 10.0);
        CHECK(detected_rate(a, d) <= detected_rate(b, d));
        CHECK(detected_rate(b, d) < 1.0 / d.dead_time_s);
    });
}

TEST_CASE("effective coincidence window") {
    CHECK(effective_coincidence_window(2e-9, 0.0, 0.0) == 2e-9);
    CHECK(effective_coincidence_window(0.0, 0.5e-9, 0.5e-9) == doctest::Approx(4.243e-9).epsilon(1e-4));
    CHECK(effective_coincidence_window(10e-9, 0.5e-9, 0.5e-9) == 10e-9);
    CHECK_THROWS_AS(effective_coincidence_window(-1e-9, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("detector validation") {
    DetectorParams d;
    d.efficiency = 0.0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d = DetectorParams{};
    d.efficiency = 1.2;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d = DetectorParams{};
    d.temperature_k = 150.0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d = DetectorParams{};
    d.dead_time_s = -1.0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    CHECK_NOTHROW(DetectorParams{}.validate());
}
