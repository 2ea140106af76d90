#pragma once

namespace satqkd {

/// Geiger-mode APD parameters. The dark-count law is
/// a * exp((T - 273.15) * b) + c, clamped at zero.
struct DetectorParams {
    double efficiency = 0.5;
    double dark_fit_a_cps = 1790.0;
    double dark_fit_b_per_k = 0.08;
    double dark_fit_c_cps = -81.0;
    double dead_time_s = 0.0;
    double jitter_rms_s = 0.5e-9;
    double temperature_k = 288.15;
    /// Detectors behind one receiver (quad polarization analyzer).
    int detectors_per_receiver = 4;

    void validate() const;
};

double dark_count_rate(const DetectorParams& p);

/// One effective detector standing in for a whole receiver: summed dark
/// counts, shared efficiency, dead time divided across the detectors.
DetectorParams aggregate_receiver(const DetectorParams& p);

/// Non-paralyzable response to `incident_cps` photons at the detector.
double detected_rate(double incident_cps, const DetectorParams& p);

inline constexpr double default_jitter_capture = 6.0;

/// max(window, k_j * sqrt(jitter_a^2 + jitter_b^2)).
double effective_coincidence_window(double window_s, double jitter_a_s, double jitter_b_s,
                                    double k_j = default_jitter_capture);

}  // namespace satqkd
