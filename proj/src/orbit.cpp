#include "satqkd/orbit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "satqkd/units.hpp"

namespace satqkd {

namespace {

constexpr double kEarthRadius = constants::earth_radius_m;

double radius_ratio(const CircularOrbit& orbit) { return kEarthRadius / (kEarthRadius + orbit.altitude_m); }

}  // namespace

void CircularOrbit::validate() const {
    if (!(altitude_m >= 160e3 && altitude_m <= 40000e3)) {
        throw std::invalid_argument(fmt::format("orbit altitude {} m outside [160 km, 40000 km]", altitude_m));
    }
}

double slant_range(const CircularOrbit& orbit, double elevation_deg) {
    if (!(elevation_deg >= 0.0 && elevation_deg <= 90.0)) {
        throw std::domain_error(fmt::format("elevation {} deg outside [0, 90]", elevation_deg));
    }
    const double s = std::sin(units::deg_to_rad(elevation_deg));
    const double h = orbit.altitude_m;
    const double r = kEarthRadius;
    return std::sqrt(r * r * s * s + 2.0 * r * h + h * h) - r * s;
}

double elevation_for_slant_range(const CircularOrbit& orbit, double range_m) {
    const double r = kEarthRadius;
    const double a = r + orbit.altitude_m;
    const double horizon = std::sqrt(a * a - r * r);
    if (!(range_m >= orbit.altitude_m && range_m <= horizon)) {
        throw std::domain_error(fmt::format("slant range {} m not visible from altitude {} m", range_m, orbit.altitude_m));
    }
    const double s = (a * a - r * r - range_m * range_m) / (2.0 * r * range_m);
    return units::rad_to_deg(std::asin(std::clamp(s, 0.0, 1.0)));
}

double orbital_period(const CircularOrbit& orbit) {
    const double a = kEarthRadius + orbit.altitude_m;
    return 2.0 * constants::pi * std::sqrt(a * a * a / constants::earth_mu_m3_s2);
}

double central_angle_rad(const CircularOrbit& orbit, double elevation_deg) {
    const double e = units::deg_to_rad(elevation_deg);
    return std::acos(radius_ratio(orbit) * std::cos(e)) - e;
}

PassProfile pass_profile(const CircularOrbit& orbit, double max_elevation_deg, double min_elevation_deg,
                         double timestep_s) {
    orbit.validate();
    if (!(timestep_s > 0.0) || !std::isfinite(timestep_s)) {
        throw std::invalid_argument("pass timestep must be positive");
    }
    if (!(min_elevation_deg >= 0.0 && min_elevation_deg < 90.0)) {
        throw std::domain_error(fmt::format("min elevation {} deg outside [0, 90)", min_elevation_deg));
    }
    if (!(max_elevation_deg > min_elevation_deg && max_elevation_deg <= 90.0)) {
        throw std::domain_error(fmt::format("max elevation {} deg unreachable with min elevation {} deg",
                                            max_elevation_deg, min_elevation_deg));
    }

    const double rate = 2.0 * constants::pi / orbital_period(orbit);
    const double gamma_min = central_angle_rad(orbit, max_elevation_deg);
    const double gamma_edge = central_angle_rad(orbit, min_elevation_deg);
    // Spherical right triangle: cos(gamma) = cos(gamma_min) cos(rate * tau).
    const double half = std::acos(std::clamp(std::cos(gamma_edge) / std::cos(gamma_min), -1.0, 1.0)) / rate;

    PassProfile p;
    p.max_elevation_deg = max_elevation_deg;
    p.min_elevation_deg = min_elevation_deg;
    p.timestep_s = timestep_s;
    p.duration_s = 2.0 * half;

    const double ratio = radius_ratio(orbit);
    const auto steps = static_cast<long>(std::floor(half / timestep_s + 1e-9));
    p.samples.reserve(static_cast<std::size_t>(2 * steps + 1));
    for (long j = -steps; j <= steps; ++j) {
        const double tau = static_cast<double>(j) * timestep_s;
        const double gamma = std::acos(std::clamp(std::cos(gamma_min) * std::cos(rate * tau), -1.0, 1.0));
        double elev = units::rad_to_deg(std::atan2(std::cos(gamma) - ratio, std::sin(gamma)));
        elev = std::clamp(elev, min_elevation_deg, max_elevation_deg);
        p.samples.push_back({half + tau, elev, slant_range(orbit, elev)});
    }
    return p;
}

double visibility_latitude_limit(double altitude_m) {
    if (!(altitude_m >= 0.0)) {
        throw std::domain_error("altitude must be non-negative");
    }
    if (std::isinf(altitude_m)) {
        return 90.0;
    }
    return units::rad_to_deg(std::acos(kEarthRadius / (kEarthRadius + altitude_m)));
}

double geo_max_latitude() { return visibility_latitude_limit(constants::geo_altitude_m); }

void write_csv(std::ostream& os, const PassProfile& profile) {
    os << "t_s,elevation_deg,slant_range_m\n";
    for (const auto& s : profile.samples) {
        os << fmt::format("{},{},{}\n", s.t_s, s.elevation_deg, s.slant_range_m);
    }
}

}  // namespace satqkd
