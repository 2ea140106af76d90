#include "satqkd/protocol_sim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "satqkd/errors.hpp"
#include "satqkd/rng.hpp"

namespace satqkd {

const char* to_string(Protocol p) { return p == Protocol::bb84 ? "bb84" : "bbm92"; }

void PartyRecord::reserve(std::size_t n) {
    bases.reserve(n);
    bits.reserve(n);
    detected.reserve(n);
    timestamps_s.reserve(n);
}

void PartyRecord::push(std::uint8_t basis, std::uint8_t bit, bool was_detected, double t_s) {
    bases.push_back(basis);
    bits.push_back(bit);
    detected.push_back(was_detected ? 1 : 0);
    timestamps_s.push_back(t_s);
}

namespace {

void check_record(const PartyRecord& r) {
    const std::size_t n = r.bases.size();
    if (r.bits.size() != n || r.detected.size() != n || r.timestamps_s.size() != n) {
        throw std::invalid_argument("party record sequences differ in length");
    }
}

struct Click {
    double t;
    std::uint8_t basis;
    std::uint8_t bit;
    bool signal;
};

struct Entry {
    double t;
    Click a;
    Click b;
    bool has_a;
    bool has_b;
    bool accidental;
};

void finish_report(RunReport& report, const PartyRecord& alice, const PartyRecord& bob) {
    const auto [key_a, key_b] = sift(alice, bob);
    report.sifted_length = key_a.size();
    std::uint64_t errors = 0;
    for (std::size_t i = 0; i < key_a.size(); ++i) {
        errors += key_a.bits[i] != key_b.bits[i];
    }
    report.sifted_errors = errors;
    report.measured_qber =
        report.sifted_length > 0 ? static_cast<double>(errors) / static_cast<double>(report.sifted_length) : 0.0;
}

}  // namespace

ProtocolRun simulate_bbm92(std::uint64_t n_pairs, const Bbm92System& sys, Decibels link_loss_a,
                           Decibels link_loss_b, std::uint64_t seed) {
    if (n_pairs < 1) {
        throw std::invalid_argument("simulate_bbm92: need at least one pair");
    }
    sys.validate();
    if (!(link_loss_a.value >= 0.0) || !(link_loss_b.value >= 0.0)) {
        throw std::invalid_argument("link losses must be non-negative");
    }

    const double rate = sys.source.pair_rate_cps;
    const double slot = 1.0 / rate;
    const double optical_a = db_to_transmittance(link_loss_a + sys.source.arm_loss_a_db).eta;
    const double optical_b = db_to_transmittance(link_loss_b + sys.source.arm_loss_b_db).eta;
    const double eff_a = sys.det_a.efficiency;
    const double eff_b = sys.det_b.efficiency;
    const double noise_a = dark_count_rate(aggregate_receiver(sys.det_a)) + eff_a * sys.bg_a.stray_rate_cps;
    const double noise_b = dark_count_rate(aggregate_receiver(sys.det_b)) + eff_b * sys.bg_b.stray_rate_cps;
    const double window = effective_coincidence_window(sys.window_s, sys.det_a.jitter_rms_s, sys.det_b.jitter_rms_s);
    // Foreign B clicks landing within +/- window of an A click.
    const double foreign_photon_mean = 2.0 * window * rate * optical_b * eff_b;
    const double foreign_noise_mean = 2.0 * window * noise_b;

    CounterRng source(seed, Stream::source);
    CounterRng channel_a(seed, Stream::channel_a);
    CounterRng channel_b(seed, Stream::channel_b);
    CounterRng detector_a(seed, Stream::detector_a);
    CounterRng detector_b(seed, Stream::detector_b);
    CounterRng basis_a(seed, Stream::basis_a);
    CounterRng basis_b(seed, Stream::basis_b);
    CounterRng foreign(seed, Stream::sampling);

    ProtocolRun run;
    RunReport& rep = run.report;
    rep.protocol = Protocol::bbm92;
    rep.n_slots = n_pairs;
    rep.duration_s = static_cast<double>(n_pairs) * slot;
    rep.seed = seed;

    const double expected_entries = static_cast<double>(n_pairs) *
                                    (std::min(1.0, optical_a * eff_a + optical_b * eff_b) + (noise_a + noise_b) * slot);
    run.alice.reserve(static_cast<std::size_t>(std::min(expected_entries * 1.1 + 16.0, 5e8)));
    run.bob.reserve(run.alice.bases.capacity());

    std::vector<Click> clicks_a;
    std::vector<Click> clicks_b;
    std::vector<Entry> entries;

    for (std::uint64_t i = 0; i < n_pairs; ++i) {
        const double t0 = static_cast<double>(i) * slot;
        const std::uint8_t outcome = source.bit();
        const bool flip = source.bernoulli(sys.source.intrinsic_qber);
        const std::uint8_t pair_basis_a = basis_a.bit();
        const std::uint8_t pair_basis_b = basis_b.bit();
        const bool sig_a = channel_a.bernoulli(optical_a) && detector_a.bernoulli(eff_a);
        const bool sig_b = channel_b.bernoulli(optical_b) && detector_b.bernoulli(eff_b);

        clicks_a.clear();
        clicks_b.clear();
        entries.clear();
        if (sig_a) {
            clicks_a.push_back({t0, pair_basis_a, outcome, true});
        }
        if (sig_b) {
            const std::uint8_t bit_b =
                pair_basis_a == pair_basis_b ? static_cast<std::uint8_t>(outcome ^ (flip ? 1 : 0)) : source.bit();
            clicks_b.push_back({t0, pair_basis_b, bit_b, true});
        }
        for (std::uint64_t k = detector_a.poisson(noise_a * slot); k > 0; --k) {
            clicks_a.push_back({t0 + detector_a.uniform() * slot, basis_a.bit(), detector_a.bit(), false});
        }
        for (std::uint64_t k = detector_b.poisson(noise_b * slot); k > 0; --k) {
            clicks_b.push_back({t0 + detector_b.uniform() * slot, basis_b.bit(), detector_b.bit(), false});
        }
        rep.detections_a += clicks_a.size();
        rep.detections_b += clicks_b.size();

        const bool true_pair = sig_a && sig_b;
        for (const Click& a : clicks_a) {
            bool paired = false;
            if (a.signal && true_pair) {
                entries.push_back({a.t, a, clicks_b.front(), true, true, false});
                ++rep.true_coincidences;
                paired = true;
            }
            const std::uint64_t n_foreign = foreign.poisson(foreign_photon_mean) + foreign.poisson(foreign_noise_mean);
            for (std::uint64_t k = 0; k < n_foreign; ++k) {
                const Click b{a.t, basis_b.bit(), foreign.bit(), false};
                entries.push_back({a.t, a, b, true, true, true});
                ++rep.accidental_coincidences;
                paired = true;
            }
            if (!paired) {
                entries.push_back({a.t, a, Click{}, true, false, false});
            }
        }
        for (const Click& b : clicks_b) {
            if (b.signal && true_pair) {
                continue;
            }
            entries.push_back({b.t, Click{}, b, false, true, false});
        }
        std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) { return x.t < y.t; });
        for (const Entry& e : entries) {
            run.alice.push(e.a.basis, e.a.bit, e.has_a, e.t);
            run.bob.push(e.b.basis, e.b.bit, e.has_b, e.t);
        }
    }
    rep.coincidences = rep.true_coincidences + rep.accidental_coincidences;
    finish_report(rep, run.alice, run.bob);
    return run;
}

ProtocolRun simulate_bb84(std::uint64_t n_pulses, const WcpSourceParams& src, Decibels link_loss,
                          const DetectorParams& det, const BackgroundLight& bg, double window_s,
                          double intrinsic_error, std::uint64_t seed) {
    if (n_pulses < 1) {
        throw std::invalid_argument("simulate_bb84: need at least one pulse");
    }
    src.validate();
    det.validate();
    if (!(intrinsic_error >= 0.0 && intrinsic_error <= 0.5) || !(window_s >= 0.0) || !(bg.stray_rate_cps >= 0.0)) {
        throw std::invalid_argument("simulate_bb84: invalid error, window or background");
    }
    const double channel = db_to_transmittance(link_loss).eta;
    const double noise = dark_count_rate(aggregate_receiver(det)) + det.efficiency * bg.stray_rate_cps;
    const double p_background = std::min(1.0, noise * window_s);
    const double slot = 1.0 / src.pulse_rate_hz;

    CounterRng source(seed, Stream::source);
    CounterRng channel_b(seed, Stream::channel_b);
    CounterRng detector_b(seed, Stream::detector_b);
    CounterRng basis_a(seed, Stream::basis_a);
    CounterRng basis_b(seed, Stream::basis_b);

    ProtocolRun run;
    RunReport& rep = run.report;
    rep.protocol = Protocol::bb84;
    rep.n_slots = n_pulses;
    rep.duration_s = static_cast<double>(n_pulses) * slot;
    rep.seed = seed;
    run.alice.reserve(n_pulses);
    run.bob.reserve(n_pulses);

    std::uint64_t sent_signal = 0;
    std::uint64_t sent_decoy = 0;
    std::uint64_t hits_signal = 0;
    std::uint64_t hits_decoy = 0;

    for (std::uint64_t i = 0; i < n_pulses; ++i) {
        const double t = static_cast<double>(i) * slot;
        const bool is_signal = source.bernoulli(src.signal_fraction);
        const double mu = is_signal ? src.mean_photon_signal : src.mean_photon_decoy;
        const std::uint64_t photons = source.poisson(mu);
        const std::uint8_t a_basis = basis_a.bit();
        const std::uint8_t a_bit = source.bit();

        bool arrived = false;
        for (std::uint64_t k = 0; k < photons; ++k) {
            const bool survives = channel_b.bernoulli(channel);
            const bool registered = detector_b.bernoulli(det.efficiency);
            arrived = arrived || (survives && registered);
        }
        const bool background = detector_b.bernoulli(p_background);
        const std::uint8_t b_basis = basis_b.bit();
        std::uint8_t b_bit = 0;
        if (arrived) {
            b_bit = a_basis == b_basis ? static_cast<std::uint8_t>(a_bit ^ (source.bernoulli(intrinsic_error) ? 1 : 0))
                                       : detector_b.bit();
            ++rep.true_coincidences;
        } else if (background) {
            b_bit = detector_b.bit();
            ++rep.accidental_coincidences;
        }
        const bool clicked = arrived || background;
        (is_signal ? sent_signal : sent_decoy) += 1;
        if (clicked) {
            (is_signal ? hits_signal : hits_decoy) += 1;
        }
        run.alice.push(a_basis, a_bit, true, t);
        run.bob.push(b_basis, b_bit, clicked, t);
    }
    rep.detections_a = n_pulses;
    rep.detections_b = rep.true_coincidences + rep.accidental_coincidences;
    rep.coincidences = rep.detections_b;
    if (sent_signal > 0) {
        rep.per_intensity_gain[src.mean_photon_signal] =
            static_cast<double>(hits_signal) / static_cast<double>(sent_signal);
    }
    if (sent_decoy > 0) {
        rep.per_intensity_gain[src.mean_photon_decoy] = static_cast<double>(hits_decoy) / static_cast<double>(sent_decoy);
    }
    finish_report(rep, run.alice, run.bob);
    return run;
}

std::pair<SiftedKey, SiftedKey> sift(const PartyRecord& a, const PartyRecord& b) {
    check_record(a);
    check_record(b);
    if (a.size() != b.size()) {
        throw std::invalid_argument(fmt::format("sift: record lengths differ ({} vs {})", a.size(), b.size()));
    }
    SiftedKey ka;
    SiftedKey kb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.detected[i] && b.detected[i] && a.bases[i] == b.bases[i]) {
            ka.bits.push_back(a.bits[i]);
            kb.bits.push_back(b.bits[i]);
            ka.source_indices.push_back(i);
        }
    }
    kb.source_indices = ka.source_indices;
    return {std::move(ka), std::move(kb)};
}

QberEstimate estimate_qber(const SiftedKey& key_a, const SiftedKey& key_b, double sample_fraction,
                           std::uint64_t seed) {
    if (key_a.bits.size() != key_b.bits.size() || key_a.source_indices != key_b.source_indices ||
        key_a.source_indices.size() != key_a.bits.size()) {
        throw std::invalid_argument("estimate_qber: keys are not aligned");
    }
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0)) {
        throw std::invalid_argument("estimate_qber: sample fraction must lie in (0, 1)");
    }
    const std::size_t n = key_a.size();
    const auto m = static_cast<std::size_t>(std::llround(sample_fraction * static_cast<double>(n)));
    if (m == 0) {
        throw EstimationError(fmt::format("estimate_qber: sample of {} bits from {} is empty", m, n));
    }

    // Partial Fisher-Yates: the first m slots of `order` form the sample.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng rng(seed, Stream::sampling);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(order[i], order[j]);
    }
    std::vector<std::uint8_t> sampled(n, 0);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sampled[order[i]] = 1;
        mismatches += key_a.bits[order[i]] != key_b.bits[order[i]];
    }

    QberEstimate est;
    est.sample_size = m;
    est.estimate = static_cast<double>(mismatches) / static_cast<double>(m);
    for (std::size_t i = 0; i < n; ++i) {
        if (sampled[i]) {
            continue;
        }
        est.remaining_a.bits.push_back(key_a.bits[i]);
        est.remaining_b.bits.push_back(key_b.bits[i]);
        est.remaining_a.source_indices.push_back(key_a.source_indices[i]);
    }
    est.remaining_b.source_indices = est.remaining_a.source_indices;
    return est;
}

double analytic_gain(double mean_photon_number, double transmittance, double background_probability) {
    return 1.0 - (1.0 - background_probability) * std::exp(-mean_photon_number * transmittance);
}

Bb84Expectation bb84_expectation(const WcpSourceParams& src, Decibels link_loss, const DetectorParams& det,
                                 const BackgroundLight& bg, double window_s, double intrinsic_error) {
    src.validate();
    det.validate();
    const double eta = db_to_transmittance(link_loss).eta * det.efficiency;
    const double noise = dark_count_rate(aggregate_receiver(det)) + det.efficiency * bg.stray_rate_cps;
    const double p_background = std::min(1.0, noise * window_s);
    const auto errors = [&](double mu) {
        const double p_signal = -std::expm1(-mu * eta);
        return p_signal * intrinsic_error + (1.0 - p_signal) * p_background * 0.5;
    };
    Bb84Expectation e;
    e.gain_signal = analytic_gain(src.mean_photon_signal, eta, p_background);
    e.gain_decoy = analytic_gain(src.mean_photon_decoy, eta, p_background);
    const double f = src.signal_fraction;
    e.gain = f * e.gain_signal + (1.0 - f) * e.gain_decoy;
    const double err = f * errors(src.mean_photon_signal) + (1.0 - f) * errors(src.mean_photon_decoy);
    e.qber = e.gain > 0.0 ? err / e.gain : 0.5;
    return e;
}

void write_csv(std::ostream& os, const RunReport& r) {
    std::string gains;
    for (const auto& [mu, gain] : r.per_intensity_gain) {
        if (!gains.empty()) {
            gains += ';';
        }
        gains += fmt::format("{}:{}", mu, gain);
    }
    os << "protocol,n_slots,duration_s,detections_a,detections_b,coincidences,true_coincidences,"
          "accidental_coincidences,sifted_length,sifted_errors,measured_qber,per_intensity_gain,seed\n";
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.protocol), r.n_slots, r.duration_s,
                      r.detections_a, r.detections_b, r.coincidences, r.true_coincidences, r.accidental_coincidences,
                      r.sifted_length, r.sifted_errors, r.measured_qber, gains, r.seed);
}

}  // namespace satqkd
