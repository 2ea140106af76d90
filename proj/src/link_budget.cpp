#include "satqkd/link_budget.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "satqkd/orbit.hpp"

namespace satqkd {

const char* to_string(LinkKind kind) {
    switch (kind) {
        case LinkKind::downlink: return "downlink";
        case LinkKind::uplink: return "uplink";
        case LinkKind::intersatellite: return "intersatellite";
        case LinkKind::double_pass: return "double_pass";
    }
    return "unknown";
}

LinkKind link_kind_from_string(const std::string& name) {
    if (name == "downlink") return LinkKind::downlink;
    if (name == "uplink") return LinkKind::uplink;
    if (name == "intersatellite") return LinkKind::intersatellite;
    if (name == "double_pass") return LinkKind::double_pass;
    throw std::invalid_argument("unknown link kind '" + name + "'");
}

namespace {

void check_terminal(const OpticalTerminal& t, const char* which) {
    if (!(t.aperture_diameter_m > 0.0) || !std::isfinite(t.aperture_diameter_m)) {
        throw std::invalid_argument(fmt::format("{} aperture diameter must be positive", which));
    }
    if (!(t.pointing_jitter_rms_rad >= 0.0)) {
        throw std::invalid_argument(fmt::format("{} pointing jitter must be non-negative", which));
    }
    if (!(t.optics_transmission_db.value >= 0.0)) {
        throw std::invalid_argument(fmt::format("{} optics loss must be non-negative", which));
    }
}

}  // namespace

void LinkScenario::validate() const {
    if (kind == LinkKind::double_pass) {
        if (legs.size() != 2) {
            throw std::invalid_argument("double_pass scenario needs exactly two legs");
        }
        for (const auto& leg : legs) {
            if (leg.kind == LinkKind::double_pass) {
                throw std::invalid_argument("double_pass legs cannot be double_pass");
            }
            leg.validate();
        }
        return;
    }
    check_terminal(tx, "transmitter");
    check_terminal(rx, "receiver");
    if (!(wavelength.metres >= 300e-9 && wavelength.metres <= 2000e-9)) {
        throw std::invalid_argument(fmt::format("wavelength {} m outside [300 nm, 2000 nm]", wavelength.metres));
    }
    if (!(range_m > 0.0) || !std::isfinite(range_m)) {
        throw std::invalid_argument("link range must be positive");
    }
    if (has_ground_terminal() && !(elevation_deg > 0.0 && elevation_deg <= 90.0)) {
        throw std::invalid_argument(fmt::format("elevation {} deg outside (0, 90]", elevation_deg));
    }
    if (!(zenith_attenuation_db.value >= 0.0) || !(uplink_turbulence_penalty_db.value >= 0.0) ||
        !(downlink_turbulence_residual_db.value >= 0.0)) {
        throw std::invalid_argument("atmospheric parameters must be non-negative");
    }
    if (!(model.k_div > 0.0) || !(model.k_pointing >= 0.0) || !(model.fried_parameter_m > 0.0) ||
        !(model.airmass_cap >= 1.0)) {
        throw std::invalid_argument("invalid link model constants");
    }
}

LinkScenario LinkScenario::double_pass(LinkScenario up, LinkScenario down) {
    LinkScenario s;
    s.kind = LinkKind::double_pass;
    s.legs = {std::move(up), std::move(down)};
    return s;
}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& other) {
    diffraction_db += other.diffraction_db;
    atmospheric_db += other.atmospheric_db;
    turbulence_db += other.turbulence_db;
    pointing_db += other.pointing_db;
    optics_db += other.optics_db;
    total_db += other.total_db;
    return *this;
}

double diffraction_divergence(const LinkScenario& s) {
    double d = s.tx.aperture_diameter_m;
    if (s.kind == LinkKind::uplink && s.model.fried_limits_uplink_diffraction) {
        d = std::min(d, s.model.fried_parameter_m);
    }
    return s.model.k_div * s.wavelength.metres / d;
}

double pointing_divergence(const LinkScenario& s) {
    double d = s.tx.aperture_diameter_m;
    if (s.kind == LinkKind::uplink) {
        d = std::min(d, s.model.fried_parameter_m);
    }
    return s.model.k_div * s.wavelength.metres / d;
}

Decibels diffraction_loss(const LinkScenario& s) {
    s.validate();
    if (s.kind == LinkKind::double_pass) {
        return diffraction_loss(s.legs[0]) + diffraction_loss(s.legs[1]);
    }
    const double beam_diameter = diffraction_divergence(s) * s.range_m;
    const double ratio = s.rx.aperture_diameter_m / beam_diameter;
    const double captured = std::min(1.0, ratio * ratio);
    // -10 log10(1) is -0.0; report a clean zero for full capture.
    return Decibels{captured >= 1.0 ? 0.0 : -10.0 * std::log10(captured)};
}

Decibels atmospheric_loss(const LinkScenario& s) {
    s.validate();
    if (s.kind == LinkKind::double_pass) {
        return atmospheric_loss(s.legs[0]) + atmospheric_loss(s.legs[1]);
    }
    if (!s.has_ground_terminal()) {
        return Decibels{0.0};
    }
    const double airmass = std::min(s.model.airmass_cap, 1.0 / std::sin(units::deg_to_rad(s.elevation_deg)));
    return Decibels{s.zenith_attenuation_db.value * airmass};
}

Decibels pointing_loss(double jitter_rms_rad, double divergence_full_angle_rad, double k_pointing) {
    if (!(jitter_rms_rad >= 0.0) || !(divergence_full_angle_rad > 0.0)) {
        throw std::invalid_argument("pointing_loss: jitter must be >= 0 and divergence > 0");
    }
    const double x = 2.0 * jitter_rms_rad / divergence_full_angle_rad;
    return Decibels{10.0 * std::log10(1.0 + k_pointing * x * x)};
}

Decibels turbulence_penalty(const LinkScenario& s) {
    s.validate();
    switch (s.kind) {
        case LinkKind::uplink: return s.uplink_turbulence_penalty_db;
        case LinkKind::downlink: return s.downlink_turbulence_residual_db;
        case LinkKind::intersatellite: return Decibels{0.0};
        case LinkKind::double_pass: return turbulence_penalty(s.legs[0]) + turbulence_penalty(s.legs[1]);
    }
    return Decibels{0.0};
}

LossBreakdown total_link_loss(const LinkScenario& s) {
    s.validate();
    if (s.kind == LinkKind::double_pass) {
        LossBreakdown sum = total_link_loss(s.legs[0]);
        sum += total_link_loss(s.legs[1]);
        return sum;
    }
    LossBreakdown b;
    b.diffraction_db = diffraction_loss(s);
    b.atmospheric_db = atmospheric_loss(s);
    b.turbulence_db = turbulence_penalty(s);
    b.pointing_db = pointing_loss(s.tx.pointing_jitter_rms_rad, pointing_divergence(s), s.model.k_pointing);
    b.optics_db = s.tx.optics_transmission_db + s.rx.optics_transmission_db;
    b.total_db = b.diffraction_db + b.atmospheric_db + b.turbulence_db + b.pointing_db + b.optics_db;
    return b;
}

std::vector<ReferenceLink> table1_scenarios(const ReferenceCalibration& cal) {
    constexpr double ground_aperture = 1.0;
    constexpr double space_aperture = 0.3;
    const CircularOrbit leo{500e3};
    const CircularOrbit geo{constants::geo_altitude_m};

    auto make = [&](LinkKind kind, double d_tx, double d_rx, double range_m, double elevation_deg) {
        LinkScenario s;
        s.kind = kind;
        s.tx = OpticalTerminal{d_tx, 0.0, cal.terminal_optics_db, TerminalRole::transmitter};
        s.rx = OpticalTerminal{d_rx, 0.0, cal.terminal_optics_db, TerminalRole::receiver};
        s.wavelength = Wavelength{800e-9};
        s.range_m = range_m;
        s.elevation_deg = elevation_deg;
        s.zenith_attenuation_db = cal.zenith_attenuation_db;
        s.uplink_turbulence_penalty_db = cal.uplink_turbulence_penalty_db;
        s.model = cal.model;
        return s;
    };
    const double leo_el = elevation_for_slant_range(leo, 500e3);
    const double geo_el = elevation_for_slant_range(geo, 36000e3);

    using K = LinkKind;
    return {
        {"ground->LEO", make(K::uplink, ground_aperture, space_aperture, 500e3, leo_el), Decibels{27.4}},
        {"ground->GEO", make(K::uplink, ground_aperture, space_aperture, 36000e3, geo_el), Decibels{64.5}},
        {"LEO->ground", make(K::downlink, space_aperture, ground_aperture, 500e3, leo_el), Decibels{6.4}},
        {"LEO->LEO", make(K::intersatellite, space_aperture, space_aperture, 2000e3, 90.0), Decibels{28.5}},
        {"LEO->GEO", make(K::intersatellite, space_aperture, space_aperture, 35000e3, 90.0), Decibels{52.9}},
        {"GEO->ground", make(K::downlink, space_aperture, ground_aperture, 36000e3, geo_el), Decibels{43.6}},
        {"GEO->LEO", make(K::intersatellite, space_aperture, space_aperture, 35000e3, 90.0), Decibels{52.9}},
        {"GEO->GEO", make(K::intersatellite, space_aperture, space_aperture, 40000e3, 90.0), Decibels{53.9}},
    };
}

}  // namespace satqkd
