#include "satqkd/qber.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

#include "satqkd/errors.hpp"

namespace satqkd {

void EntangledSourceParams::validate() const {
    if (!(pair_rate_cps > 0.0) || !std::isfinite(pair_rate_cps)) {
        throw std::invalid_argument("pair rate must be positive");
    }
    if (!(intrinsic_qber >= 0.0 && intrinsic_qber < 0.5)) {
        throw std::invalid_argument(fmt::format("intrinsic QBER {} outside [0, 0.5)", intrinsic_qber));
    }
    if (!(arm_loss_a_db.value >= 0.0) || !(arm_loss_b_db.value >= 0.0)) {
        throw std::invalid_argument("internal arm losses must be non-negative");
    }
}

void WcpSourceParams::validate() const {
    if (!(pulse_rate_hz > 0.0) || !std::isfinite(pulse_rate_hz)) {
        throw std::invalid_argument("pulse rate must be positive");
    }
    if (!(mean_photon_decoy > 0.0 && mean_photon_decoy < mean_photon_signal && mean_photon_signal <= 1.5)) {
        throw std::invalid_argument("mean photon numbers must satisfy 0 < decoy < signal <= 1.5");
    }
    if (!(signal_fraction >= 0.0 && signal_fraction <= 1.0)) {
        throw std::invalid_argument("signal fraction outside [0, 1]");
    }
}

double accidental_rate(double s1_cps, double s2_cps, double window_s, bool either_first) {
    if (!(s1_cps >= 0.0) || !(s2_cps >= 0.0) || !(window_s >= 0.0)) {
        throw std::invalid_argument("accidental_rate: rates and window must be non-negative");
    }
    return (either_first ? 2.0 : 1.0) * s1_cps * s2_cps * window_s;
}

namespace {

double mix_qber(double intrinsic, double true_cps, double accidental_cps) {
    const double total = true_cps + accidental_cps;
    if (!(total > 0.0)) {
        return 0.5;
    }
    return (intrinsic * true_cps + 0.5 * accidental_cps) / total;
}

void check_background(const BackgroundLight& bg) {
    if (!(bg.stray_rate_cps >= 0.0)) {
        throw std::invalid_argument("stray light rate must be non-negative");
    }
}

}  // namespace

QberPoint bbm92_qber(const EntangledSourceParams& source, const DetectorParams& det_a, const DetectorParams& det_b,
                     Decibels link_loss_a, Decibels link_loss_b, const BackgroundLight& bg_a,
                     const BackgroundLight& bg_b, double window_s) {
    source.validate();
    det_a.validate();
    det_b.validate();
    check_background(bg_a);
    check_background(bg_b);
    if (!(link_loss_a.value >= 0.0) || !(link_loss_b.value >= 0.0)) {
        throw std::invalid_argument("link losses must be non-negative");
    }

    const double optical_a = db_to_transmittance(link_loss_a + source.arm_loss_a_db).eta;
    const double optical_b = db_to_transmittance(link_loss_b + source.arm_loss_b_db).eta;
    const double rate = source.pair_rate_cps;

    QberPoint p;
    p.link_loss_db = link_loss_a + link_loss_b;
    p.temperature_k = det_a.temperature_k;
    p.true_coincidences_cps = rate * optical_a * det_a.efficiency * optical_b * det_b.efficiency;
    p.singles_a_cps = detected_rate(rate * optical_a + bg_a.stray_rate_cps, aggregate_receiver(det_a));
    p.singles_b_cps = detected_rate(rate * optical_b + bg_b.stray_rate_cps, aggregate_receiver(det_b));
    const double window = effective_coincidence_window(window_s, det_a.jitter_rms_s, det_b.jitter_rms_s);
    p.accidental_coincidences_cps = accidental_rate(p.singles_a_cps, p.singles_b_cps, window, true);
    p.qber = mix_qber(source.intrinsic_qber, p.true_coincidences_cps, p.accidental_coincidences_cps);
    return p;
}

QberPoint bb84_qber(const WcpSourceParams& source, const DetectorParams& det, Decibels link_loss,
                    const BackgroundLight& bg, double window_s, double intrinsic_error) {
    source.validate();
    det.validate();
    check_background(bg);
    if (!(intrinsic_error >= 0.0 && intrinsic_error <= 0.5)) {
        throw std::invalid_argument("intrinsic error outside [0, 0.5]");
    }
    if (!(window_s >= 0.0)) {
        throw std::invalid_argument("window must be non-negative");
    }
    const double eta = db_to_transmittance(link_loss).eta * det.efficiency;
    const double p_signal = -std::expm1(-source.mean_photon_signal * eta);
    const double noise_cps = dark_count_rate(aggregate_receiver(det)) + det.efficiency * bg.stray_rate_cps;
    const double p_background = noise_cps * window_s;

    QberPoint p;
    p.link_loss_db = link_loss;
    p.temperature_k = det.temperature_k;
    p.singles_a_cps = source.pulse_rate_hz;
    p.true_coincidences_cps = source.pulse_rate_hz * p_signal;
    p.accidental_coincidences_cps = source.pulse_rate_hz * p_background;
    p.singles_b_cps = p.true_coincidences_cps + p.accidental_coincidences_cps;
    p.qber = mix_qber(intrinsic_error, p_signal, p_background);
    return p;
}

void Bbm92System::validate() const {
    source.validate();
    det_a.validate();
    det_b.validate();
    check_background(bg_a);
    check_background(bg_b);
    if (!(window_s >= 0.0)) {
        throw std::invalid_argument("coincidence window must be non-negative");
    }
    if (!(link_loss_share_a >= 0.0 && link_loss_share_a <= 1.0)) {
        throw std::invalid_argument("link loss share outside [0, 1]");
    }
}

Bbm92System Bbm92System::at_temperature(double temperature_k) const {
    Bbm92System s = *this;
    s.det_a.temperature_k = temperature_k;
    s.det_b.temperature_k = temperature_k;
    return s;
}

QberPoint evaluate(const Bbm92System& sys, Decibels total_link_loss) {
    sys.validate();
    return bbm92_qber(sys.source, sys.det_a, sys.det_b, sys.link_loss_a(total_link_loss),
                      sys.link_loss_b(total_link_loss), sys.bg_a, sys.bg_b, sys.window_s);
}

std::vector<QberPoint> qber_vs_loss_sweep(const Bbm92System& sys, const std::vector<double>& temperatures_k,
                                          const std::vector<double>& losses_db) {
    if (temperatures_k.empty() || losses_db.empty()) {
        throw std::invalid_argument("sweep grids must be non-empty");
    }
    std::vector<QberPoint> rows;
    rows.reserve(temperatures_k.size() * losses_db.size());
    for (double t : temperatures_k) {
        const Bbm92System at_t = sys.at_temperature(t);
        for (double loss : losses_db) {
            rows.push_back(evaluate(at_t, Decibels{loss}));
        }
    }
    return rows;
}

ToleranceResult max_tolerable_loss(const Bbm92System& sys, double temperature_k, double threshold) {
    const Bbm92System at_t = sys.at_temperature(temperature_k);
    const double q0 = evaluate(at_t, Decibels{0.0}).qber;
    if (q0 >= threshold) {
        throw InfeasibleError(fmt::format("QBER {} at zero loss already at or above threshold {}", q0, threshold));
    }
    if (evaluate(at_t, Decibels{loss_search_cap_db}).qber < threshold) {
        return {Decibels{loss_search_cap_db}, true};
    }
    double lo = 0.0;
    double hi = loss_search_cap_db;
    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        const double q = evaluate(at_t, Decibels{mid}).qber;
        if (std::abs(q - threshold) < 1e-10 || hi - lo < 1e-12) {
            break;
        }
        (q < threshold ? lo : hi) = mid;
    }
    return {Decibels{mid}, false};
}

}  // namespace satqkd
