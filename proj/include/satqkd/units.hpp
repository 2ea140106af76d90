#pragma once

#include <cmath>

namespace satqkd {

/// Optical attenuation in decibels. Positive values are losses.
struct Decibels {
    double value = 0.0;

    constexpr Decibels& operator+=(Decibels other) {
        value += other.value;
        return *this;
    }
    friend constexpr Decibels operator+(Decibels a, Decibels b) { return Decibels{a.value + b.value}; }
    friend constexpr Decibels operator-(Decibels a, Decibels b) { return Decibels{a.value - b.value}; }
    friend constexpr Decibels operator*(double k, Decibels a) { return Decibels{k * a.value}; }
    friend constexpr bool operator==(Decibels, Decibels) = default;
};

/// Power transmittance, 0 <= eta <= 1.
struct Transmittance {
    double eta = 1.0;
};

struct Wavelength {
    double metres = 800e-9;
};

namespace constants {
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double earth_radius_m = 6371e3;
inline constexpr double earth_mu_m3_s2 = 3.986004418e14;
inline constexpr double geo_altitude_m = 35786e3;
}  // namespace constants

namespace units {
inline constexpr double km = 1e3;
inline constexpr double ns = 1e-9;
inline constexpr double urad = 1e-6;
inline constexpr double nm = 1e-9;
inline constexpr double MHz = 1e6;

constexpr double deg_to_rad(double deg) { return deg * constants::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / constants::pi; }
}  // namespace units

// Throws std::invalid_argument for a non-finite loss.
Transmittance db_to_transmittance(Decibels loss);

// Throws std::domain_error for eta <= 0 (total blockage) and
// std::invalid_argument for eta > 1 or NaN.
Decibels transmittance_to_db(Transmittance t);

}  // namespace satqkd
