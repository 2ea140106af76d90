#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "satqkd/qber.hpp"

namespace satqkd {

/// One bit per element, values 0 or 1.
using BitString = std::vector<std::uint8_t>;

enum class Protocol { bb84, bbm92 };

const char* to_string(Protocol p);

/// Per-party record of detection opportunities. Entry i of both parties'
/// records refers to the same event; `detected` marks whether this party
/// registered a click there. Bases: 0 = Z, 1 = X.
struct PartyRecord {
    BitString bases;
    BitString bits;
    BitString detected;
    std::vector<double> timestamps_s;

    std::size_t size() const { return bases.size(); }
    void reserve(std::size_t n);
    void push(std::uint8_t basis, std::uint8_t bit, bool was_detected, double t_s);
};

struct SiftedKey {
    BitString bits;
    std::vector<std::size_t> source_indices;

    std::size_t size() const { return bits.size(); }
};

struct RunReport {
    Protocol protocol = Protocol::bbm92;
    std::uint64_t n_slots = 0;
    double duration_s = 0.0;
    std::uint64_t detections_a = 0;
    std::uint64_t detections_b = 0;
    std::uint64_t coincidences = 0;
    std::uint64_t true_coincidences = 0;
    std::uint64_t accidental_coincidences = 0;
    std::uint64_t sifted_length = 0;
    std::uint64_t sifted_errors = 0;
    double measured_qber = 0.0;
    /// BB84 only: mean photon number -> fraction of pulses detected.
    std::map<double, double> per_intensity_gain;
    std::uint64_t seed = 0;

    double coincidence_rate_cps() const { return duration_s > 0 ? static_cast<double>(coincidences) / duration_s : 0.0; }
};

/// Flat CSV record (header + one row) with the seed for replay.
void write_csv(std::ostream& os, const RunReport& report);

struct ProtocolRun {
    RunReport report;
    PartyRecord alice;
    PartyRecord bob;
};

/// Slot-discretized BBM92: one pair per slot of length 1 / pair_rate.
/// Darks, stray light and coincidences with foreign clicks inside the
/// coincidence window are included; dead time is not simulated.
ProtocolRun simulate_bbm92(std::uint64_t n_pairs, const Bbm92System& system, Decibels link_loss_a,
                           Decibels link_loss_b, std::uint64_t seed);

/// Prepare-and-measure BB84 with weak coherent pulses and two intensities.
ProtocolRun simulate_bb84(std::uint64_t n_pulses, const WcpSourceParams& source, Decibels link_loss,
                          const DetectorParams& det, const BackgroundLight& bg, double window_s,
                          double intrinsic_error, std::uint64_t seed);

/// Keeps entries where both parties detected in the same basis.
/// Throws std::invalid_argument on length mismatch.
std::pair<SiftedKey, SiftedKey> sift(const PartyRecord& a, const PartyRecord& b);

struct QberEstimate {
    double estimate = 0.0;
    std::size_t sample_size = 0;
    SiftedKey remaining_a;
    SiftedKey remaining_b;
};

/// Publicly compares a random subset of round(sample_fraction * n) positions
/// and removes it from both keys. Throws std::invalid_argument for
/// misaligned keys or a fraction outside (0, 1), EstimationError when the
/// sample would be empty.
QberEstimate estimate_qber(const SiftedKey& key_a, const SiftedKey& key_b, double sample_fraction, std::uint64_t seed);

double analytic_gain(double mean_photon_number, double transmittance, double background_probability);

/// Per-pulse expectations of simulate_bb84 for the same parameters.
struct Bb84Expectation {
    double gain_signal = 0.0;
    double gain_decoy = 0.0;
    double gain = 0.0;
    double qber = 0.0;
};

Bb84Expectation bb84_expectation(const WcpSourceParams& source, Decibels link_loss, const DetectorParams& det,
                                 const BackgroundLight& bg, double window_s, double intrinsic_error);

}  // namespace satqkd
