#pragma once

#include <vector>

#include "satqkd/detector.hpp"
#include "satqkd/units.hpp"

namespace satqkd {

struct EntangledSourceParams {
    double pair_rate_cps = 1e6;
    double intrinsic_qber = 0.015;
    /// Internal (non-link) losses in each arm.
    Decibels arm_loss_a_db{0.0};
    Decibels arm_loss_b_db{0.0};

    void validate() const;
};

struct WcpSourceParams {
    double pulse_rate_hz = 100e6;
    double mean_photon_signal = 0.5;
    double mean_photon_decoy = 0.1;
    double signal_fraction = 0.9;

    void validate() const;
};

struct BackgroundLight {
    /// Stray photons per second arriving at one receiver.
    double stray_rate_cps = 0.0;
};

struct QberPoint {
    Decibels link_loss_db{0.0};
    double temperature_k = 0.0;
    double singles_a_cps = 0.0;
    double singles_b_cps = 0.0;
    double true_coincidences_cps = 0.0;
    double accidental_coincidences_cps = 0.0;
    double qber = 0.0;
};

/// Accidental coincidence rate s1 * s2 * window, doubled when either
/// detector may fire first.
double accidental_rate(double s1_cps, double s2_cps, double window_s, bool either_first = true);

/// Analytic BBM92 coincidence statistics for one pair of link losses.
QberPoint bbm92_qber(const EntangledSourceParams& source, const DetectorParams& det_a, const DetectorParams& det_b,
                     Decibels link_loss_a, Decibels link_loss_b, const BackgroundLight& bg_a,
                     const BackgroundLight& bg_b, double window_s);

/// Simplified weak-coherent-pulse BB84 (no decoy bounds). `link_loss`
/// excludes detector efficiency, which is taken from `det`.
QberPoint bb84_qber(const WcpSourceParams& source, const DetectorParams& det, Decibels link_loss,
                    const BackgroundLight& bg, double window_s, double intrinsic_error);

/// A complete BBM92 system whose total link loss is distributed between
/// the arms: arm A receives `link_loss_share_a` of it, arm B the rest.
struct Bbm92System {
    EntangledSourceParams source{};
    DetectorParams det_a{};
    DetectorParams det_b{};
    BackgroundLight bg_a{};
    BackgroundLight bg_b{};
    double window_s = 2e-9;
    double link_loss_share_a = 0.5;

    void validate() const;

    Decibels link_loss_a(Decibels total) const { return link_loss_share_a * total; }
    Decibels link_loss_b(Decibels total) const { return (1.0 - link_loss_share_a) * total; }

    /// Copy with both detectors at `temperature_k`.
    Bbm92System at_temperature(double temperature_k) const;
};

QberPoint evaluate(const Bbm92System& sys, Decibels total_link_loss);

/// Rows ordered by (temperature, loss) in the order given.
std::vector<QberPoint> qber_vs_loss_sweep(const Bbm92System& sys, const std::vector<double>& temperatures_k,
                                          const std::vector<double>& losses_db);

struct ToleranceResult {
    Decibels loss{0.0};
    /// No crossing inside the search window; `loss` is the window cap.
    bool capped = false;
};

inline constexpr double default_qber_threshold = 0.11;
inline constexpr double loss_search_cap_db = 100.0;

/// Total link loss at which QBER reaches `threshold`, by bisection over
/// [0, 100] dB. Throws InfeasibleError if QBER at 0 dB is already at or
/// above the threshold.
ToleranceResult max_tolerable_loss(const Bbm92System& sys, double temperature_k,
                                   double threshold = default_qber_threshold);

}  // namespace satqkd
