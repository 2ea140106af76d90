#include "satqkd/key_rate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace satqkd {

void OverheadParams::validate() const {
    if (!(timetag_bits_per_event >= 0.0) || !(basis_bits_per_sifted >= 0.0) || !(framing_overhead >= 0.0)) {
        throw std::invalid_argument("overhead parameters must be non-negative");
    }
    if (!(ec_efficiency >= 1.0)) {
        throw std::invalid_argument(fmt::format("error-correction efficiency {} below 1", ec_efficiency));
    }
    if (!(qber_threshold > 0.0 && qber_threshold <= 0.5)) {
        throw std::invalid_argument("QBER threshold outside (0, 0.5]");
    }
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error(fmt::format("binary_entropy: p = {} outside [0, 1]", p));
    }
    if (p == 0.0 || p == 1.0) {
        return 0.0;
    }
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double secure_key_fraction(double qber, double f_ec) {
    if (!(qber >= 0.0 && qber <= 0.5)) {
        throw std::invalid_argument(fmt::format("QBER {} outside [0, 0.5]", qber));
    }
    if (!(f_ec >= 1.0)) {
        throw std::invalid_argument("error-correction efficiency below 1");
    }
    return std::max(0.0, 1.0 - (1.0 + f_ec) * binary_entropy(qber));
}

double classical_overhead(double singles_a_cps, double singles_b_cps, double sifted_rate_bps, double qber,
                          const OverheadParams& o) {
    o.validate();
    if (!(singles_a_cps >= 0.0) || !(singles_b_cps >= 0.0) || !(sifted_rate_bps >= 0.0)) {
        throw std::invalid_argument("classical_overhead: rates must be non-negative");
    }
    const double timetags = o.timetag_bits_per_event * (singles_a_cps + singles_b_cps);
    const double basis = o.basis_bits_per_sifted * 2.0 * sifted_rate_bps;
    const double reconciliation = o.ec_efficiency * binary_entropy(qber) * sifted_rate_bps;
    return (timetags + basis + reconciliation) * (1.0 + o.framing_overhead);
}

KeyRateResult secure_key_rate(double coincidence_rate_cps, double qber, const OverheadParams& overhead,
                              double singles_a_cps, double singles_b_cps) {
    overhead.validate();
    if (!(coincidence_rate_cps >= 0.0)) {
        throw std::invalid_argument("coincidence rate must be non-negative");
    }
    KeyRateResult r;
    if (coincidence_rate_cps == 0.0) {
        r.classical_overhead_bps = classical_overhead(singles_a_cps, singles_b_cps, 0.0, 0.0, overhead);
        return r;
    }
    r.qber = qber;
    // Passive basis choice: half of the coincidences survive sifting.
    r.sifted_rate_bps = 0.5 * coincidence_rate_cps;
    r.key_fraction = qber >= overhead.qber_threshold ? 0.0 : secure_key_fraction(qber, overhead.ec_efficiency);
    r.secure_rate_bps = r.sifted_rate_bps * r.key_fraction;
    r.classical_overhead_bps = classical_overhead(singles_a_cps, singles_b_cps, r.sifted_rate_bps, qber, overhead);
    r.feasible = r.key_fraction > 0.0;
    return r;
}

KeyRateResult secure_key_rate(const QberPoint& point, const OverheadParams& overhead) {
    return secure_key_rate(point.true_coincidences_cps + point.accidental_coincidences_cps, point.qber, overhead,
                           point.singles_a_cps, point.singles_b_cps);
}

PassYield pass_key_yield(const PassProfile& profile, const LinkScenario& scenario_template, const Bbm92System& system,
                         const OverheadParams& overhead) {
    if (profile.samples.empty()) {
        throw std::invalid_argument("pass profile has no samples");
    }
    system.validate();
    overhead.validate();

    PassYield y;
    y.samples.reserve(profile.samples.size());
    LinkScenario scenario = scenario_template;
    for (const auto& g : profile.samples) {
        scenario.range_m = g.slant_range_m;
        scenario.elevation_deg = g.elevation_deg;
        PassYieldSample s;
        s.geometry = g;
        s.link_loss_db = total_link_loss(scenario).total_db;
        s.rate = secure_key_rate(evaluate(system, s.link_loss_db), overhead);
        s.secure_bits = s.rate.secure_rate_bps * profile.timestep_s;
        s.classical_bits = s.rate.classical_overhead_bps * profile.timestep_s;

        y.total_secure_bits += s.secure_bits;
        y.steady_state_classical_bits += s.classical_bits;
        y.steady_state_peak_bps = std::max(y.steady_state_peak_bps, s.rate.classical_overhead_bps);
        if (s.rate.feasible) {
            y.store_and_forward_classical_bits += s.classical_bits;
        }
        y.samples.push_back(s);
    }
    return y;
}

}  // namespace satqkd
