#include "satqkd/detector.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace satqkd {

void DetectorParams::validate() const {
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
        throw std::invalid_argument(fmt::format("detector efficiency {} outside (0, 1]", efficiency));
    }
    if (!(dead_time_s >= 0.0) || !(jitter_rms_s >= 0.0)) {
        throw std::invalid_argument("detector dead time and jitter must be non-negative");
    }
    if (!(temperature_k >= 200.0 && temperature_k <= 330.0)) {
        throw std::invalid_argument(fmt::format("detector temperature {} K outside [200, 330]", temperature_k));
    }
    if (!std::isfinite(dark_fit_a_cps) || !std::isfinite(dark_fit_b_per_k) || !std::isfinite(dark_fit_c_cps)) {
        throw std::invalid_argument("dark-count fit constants must be finite");
    }
    if (detectors_per_receiver < 1) {
        throw std::invalid_argument("a receiver needs at least one detector");
    }
}

double dark_count_rate(const DetectorParams& p) {
    const double fit = p.dark_fit_a_cps * std::exp((p.temperature_k - 273.15) * p.dark_fit_b_per_k) + p.dark_fit_c_cps;
    return std::max(0.0, fit);
}

DetectorParams aggregate_receiver(const DetectorParams& p) {
    DetectorParams agg = p;
    const double n = p.detectors_per_receiver;
    agg.dark_fit_a_cps *= n;
    agg.dark_fit_c_cps *= n;
    agg.dead_time_s /= n;
    agg.detectors_per_receiver = 1;
    return agg;
}

double detected_rate(double incident_cps, const DetectorParams& p) {
    if (!(incident_cps >= 0.0)) {
        throw std::invalid_argument("incident rate must be non-negative");
    }
    const double r = p.efficiency * incident_cps + dark_count_rate(p);
    if (std::isinf(r)) {
        return p.dead_time_s > 0.0 ? 1.0 / p.dead_time_s : r;
    }
    return r / (1.0 + r * p.dead_time_s);
}

double effective_coincidence_window(double window_s, double jitter_a_s, double jitter_b_s, double k_j) {
    if (!(window_s >= 0.0) || !(jitter_a_s >= 0.0) || !(jitter_b_s >= 0.0) || !(k_j >= 0.0)) {
        throw std::invalid_argument("coincidence window and jitters must be non-negative");
    }
    return std::max(window_s, k_j * std::hypot(jitter_a_s, jitter_b_s));
}

}  // namespace satqkd
