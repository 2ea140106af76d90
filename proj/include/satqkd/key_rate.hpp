#pragma once

#include <vector>

#include "satqkd/link_budget.hpp"
#include "satqkd/orbit.hpp"
#include "satqkd/qber.hpp"

namespace satqkd {

struct OverheadParams {
    /// Calibrated against 55 kbps / 7.5 Mbps at 6.4 dB and 288.15 K.
    double timetag_bits_per_event = 6.0;
    double basis_bits_per_sifted = 1.0;
    double ec_efficiency = 1.0;
    double framing_overhead = 0.0;
    double qber_threshold = default_qber_threshold;

    void validate() const;
};

struct KeyRateResult {
    double sifted_rate_bps = 0.0;
    double qber = 0.0;
    double key_fraction = 0.0;
    double secure_rate_bps = 0.0;
    double classical_overhead_bps = 0.0;
    bool feasible = false;
};

/// h2(p). Throws std::domain_error outside [0, 1].
double binary_entropy(double p);

/// max(0, 1 - f_ec h2(e) - h2(e)).
double secure_key_fraction(double qber, double f_ec = 1.0);

double classical_overhead(double singles_a_cps, double singles_b_cps, double sifted_rate_bps, double qber,
                          const OverheadParams& overhead);

KeyRateResult secure_key_rate(double coincidence_rate_cps, double qber, const OverheadParams& overhead,
                              double singles_a_cps = 0.0, double singles_b_cps = 0.0);

KeyRateResult secure_key_rate(const QberPoint& point, const OverheadParams& overhead);

struct PassYieldSample {
    PassSample geometry;
    Decibels link_loss_db{0.0};
    KeyRateResult rate;
    double secure_bits = 0.0;
    double classical_bits = 0.0;
};

struct PassYield {
    double total_secure_bits = 0.0;
    /// Classical data exchanged in real time during the whole pass.
    double steady_state_classical_bits = 0.0;
    double steady_state_peak_bps = 0.0;
    /// Classical data recorded during feasible samples and sent later.
    double store_and_forward_classical_bits = 0.0;
    std::vector<PassYieldSample> samples;
};

/// Integrates the secure key over a pass. The template's range and
/// elevation are replaced per sample; each sample contributes rate * timestep.
PassYield pass_key_yield(const PassProfile& profile, const LinkScenario& scenario_template, const Bbm92System& system,
                         const OverheadParams& overhead);

}  // namespace satqkd
