#pragma once

#include <string>
#include <vector>

#include "satqkd/units.hpp"

namespace satqkd {

enum class LinkKind { downlink, uplink, intersatellite, double_pass };
enum class TerminalRole { transmitter, receiver };

const char* to_string(LinkKind kind);
LinkKind link_kind_from_string(const std::string& name);

struct OpticalTerminal {
    double aperture_diameter_m = 0.3;
    double pointing_jitter_rms_rad = 0.0;
    Decibels optics_transmission_db{0.0};
    TerminalRole role = TerminalRole::transmitter;
};

/// Model constants shared by every scenario. Defaults are the shipped
/// calibration that reproduces the reference attenuation table.
struct LinkModel {
    /// Full-angle divergence = k_div * lambda / D.
    double k_div = 1.0;
    /// Pointing loss = 10 log10(1 + k_pointing (2 sigma / theta)^2).
    /// Fitted jointly to 4 dB (2 urad, 20 cm downlink) and < 1 dB (20 cm uplink).
    double k_pointing = 0.9;
    /// Fried parameter limiting the effective aperture of ground transmitters.
    double fried_parameter_m = 0.1;
    /// Apply the Fried limit to uplink diffraction as well as pointing. Off by
    /// default: the flat uplink turbulence penalty already carries beam spread.
    bool fried_limits_uplink_diffraction = false;
    double airmass_cap = 38.0;
};

struct LinkScenario {
    LinkKind kind = LinkKind::downlink;
    OpticalTerminal tx{0.3, 0.0, {0.0}, TerminalRole::transmitter};
    OpticalTerminal rx{1.0, 0.0, {0.0}, TerminalRole::receiver};
    Wavelength wavelength{800e-9};
    double range_m = 500e3;
    double elevation_deg = 90.0;
    Decibels zenith_attenuation_db{3.0};
    Decibels uplink_turbulence_penalty_db{21.0};
    Decibels downlink_turbulence_residual_db{0.0};
    LinkModel model{};
    /// double_pass only: exactly two legs, up then down.
    std::vector<LinkScenario> legs;

    bool has_ground_terminal() const { return kind == LinkKind::downlink || kind == LinkKind::uplink; }

    /// Throws std::invalid_argument describing the first violated invariant.
    void validate() const;

    static LinkScenario double_pass(LinkScenario up, LinkScenario down);
};

struct LossBreakdown {
    Decibels diffraction_db{0.0};
    Decibels atmospheric_db{0.0};
    Decibels turbulence_db{0.0};
    Decibels pointing_db{0.0};
    Decibels optics_db{0.0};
    Decibels total_db{0.0};

    LossBreakdown& operator+=(const LossBreakdown& other);
};

/// Full-angle transmit divergence used for the diffraction term.
double diffraction_divergence(const LinkScenario& s);

/// Full-angle divergence seen by the pointing term. Ground transmitters are
/// turbulence-broadened: the aperture is limited to the Fried parameter.
double pointing_divergence(const LinkScenario& s);

Decibels diffraction_loss(const LinkScenario& s);
Decibels atmospheric_loss(const LinkScenario& s);
Decibels pointing_loss(double jitter_rms_rad, double divergence_full_angle_rad, double k_pointing = LinkModel{}.k_pointing);
Decibels turbulence_penalty(const LinkScenario& s);

/// Itemized loss. For double_pass, the sum of the two legs.
LossBreakdown total_link_loss(const LinkScenario& s);

struct ReferenceLink {
    std::string name;
    LinkScenario scenario;
    Decibels reference_db;
};

/// The eight populated cells of the 800 nm reference attenuation table as
/// preset scenarios. `model`, zenith attenuation, turbulence penalty and
/// per-terminal optics loss can be overridden for recalibration studies.
struct ReferenceCalibration {
    LinkModel model{};
    Decibels zenith_attenuation_db{3.0};
    Decibels uplink_turbulence_penalty_db{21.0};
    Decibels terminal_optics_db{1.0};
};

std::vector<ReferenceLink> table1_scenarios(const ReferenceCalibration& cal = {});

}  // namespace satqkd
