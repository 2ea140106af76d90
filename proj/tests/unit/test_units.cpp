#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gen.hpp"
#include "satqkd/units.hpp"

using namespace satqkd;

TEST_CASE("db_to_transmittance examples") {
    CHECK(db_to_transmittance(Decibels{0.0}).eta == 1.0);
    CHECK(db_to_transmittance(Decibels{6.4}).eta == doctest::Approx(0.229087).epsilon(1e-5));
    CHECK(db_to_transmittance(Decibels{3.0}).eta == doctest::Approx(0.501187).epsilon(1e-5));
}

TEST_CASE("fibre baseline: 0.18 dB/km over 1000 km is exactly 1e-18") {
    const Decibels loss = 0.18 * 1000.0 * Decibels{1.0};
    CHECK(loss.value == 180.0);
    CHECK(db_to_transmittance(loss).eta == 1e-18);
    CHECK(transmittance_to_db(Transmittance{1e-18}).value == 180.0);
}

TEST_CASE("transmittance_to_db examples") {
    CHECK(transmittance_to_db(Transmittance{1.0}).value == 0.0);
    CHECK(transmittance_to_db(Transmittance{0.5}).value == doctest::Approx(3.0103).epsilon(1e-5));
}

TEST_CASE("conversion errors") {
    CHECK_THROWS_AS(transmittance_to_db(Transmittance{0.0}), std::domain_error);
    CHECK_THROWS_AS(transmittance_to_db(Transmittance{-0.1}), std::domain_error);
    CHECK_THROWS_AS(transmittance_to_db(Transmittance{1.5}), std::invalid_argument);
    CHECK_THROWS_AS(transmittance_to_db(Transmittance{std::nan("")}), std::invalid_argument);
    CHECK_THROWS_AS(db_to_transmittance(Decibels{std::numeric_limits<double>::infinity()}), std::invalid_argument);
    CHECK_THROWS_AS(db_to_transmittance(Decibels{std::nan("")}), std::invalid_argument);
}

TEST_CASE("round trip dB -> eta -> dB over [0, 200]") {
    gen::for_all(2000, 11, [](gen::Source& g) {
        const double x = g.uniform(0.0, 200.0);
        const double back = transmittance_to_db(db_to_transmittance(Decibels{x})).value;
        CHECK(std::abs(back - x) <= 1e-12 * std::max(1.0, x));
    });
}

TEST_CASE("losses in dB add, transmittances multiply") {
    gen::for_all(500, 12, [](gen::Source& g) {
        const Decibels a{g.uniform(0.0, 80.0)};
        const Decibels b{g.uniform(0.0, 80.0)};
        const double lhs = db_to_transmittance(a + b).eta;
        const double rhs = db_to_transmittance(a).eta * db_to_transmittance(b).eta;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    });
}

TEST_CASE("unit helpers") {
    CHECK(500 * units::km == 500e3);
    CHECK(2 * units::ns == doctest::Approx(2e-9));
    CHECK(units::deg_to_rad(180.0) == doctest::Approx(constants::pi));
}
