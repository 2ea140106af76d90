#pragma once

#include <iosfwd>
#include <vector>

namespace satqkd {

/// Circular two-body orbit over a non-rotating spherical Earth.
struct CircularOrbit {
    double altitude_m = 500e3;

    /// Throws std::invalid_argument outside 160 km .. 40000 km.
    void validate() const;
};

/// Station-to-satellite distance at the given elevation.
/// Throws std::domain_error for elevation outside [0, 90] deg.
double slant_range(const CircularOrbit& orbit, double elevation_deg);

/// Inverse of slant_range. Throws std::domain_error when the range cannot
/// be seen above the horizon.
double elevation_for_slant_range(const CircularOrbit& orbit, double range_m);

double orbital_period(const CircularOrbit& orbit);

/// Earth central angle between the sub-satellite point and a station that
/// sees the satellite at `elevation_deg`.
double central_angle_rad(const CircularOrbit& orbit, double elevation_deg);

struct PassSample {
    double t_s;
    double elevation_deg;
    double slant_range_m;
};

struct PassProfile {
    std::vector<PassSample> samples;
    double max_elevation_deg = 0.0;
    double min_elevation_deg = 0.0;
    double timestep_s = 1.0;
    /// Geometric rise-to-set time above min_elevation.
    double duration_s = 0.0;
};

/// Samples a symmetric pass culminating at max_elevation, starting when the
/// satellite rises through min_elevation (t = 0) and stepping by timestep
/// until it sets. Throws std::domain_error for infeasible geometry and
/// std::invalid_argument for a non-positive timestep.
PassProfile pass_profile(const CircularOrbit& orbit, double max_elevation_deg, double min_elevation_deg,
                         double timestep_s);

/// Highest latitude at which a satellite on the equatorial orbit at
/// `altitude_m` stays above the horizon.
double visibility_latitude_limit(double altitude_m);
double geo_max_latitude();

/// Columns: t_s, elevation_deg, slant_range_m.
void write_csv(std::ostream& os, const PassProfile& profile);

}  // namespace satqkd
