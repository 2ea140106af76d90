#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "satqkd/protocol_sim.hpp"

namespace satqkd {

/// Bitwise XOR. Throws std::invalid_argument on length mismatch.
BitString xor_relay(const BitString& key_a, const BitString& key_b);

struct ParityAnnouncement {
    std::string station_a;
    std::string station_b;
    std::size_t offset_a = 0;
    std::size_t offset_b = 0;
    BitString parity;
};

/// Key material held by the satellite, one key per ground station. Bits
/// are consumed front to back and never handed out twice.
class TrustedNodeStore {
public:
    /// Appends freshly established key bits for `station`.
    void deposit(const std::string& station, const BitString& bits);

    bool has_station(const std::string& station) const;
    std::size_t total(const std::string& station) const;
    std::size_t consumed(const std::string& station) const;
    std::size_t remaining(const std::string& station) const;

    /// Consumes `length` bits from both stations and returns K_A xor K_B.
    /// Throws KeyDepletionError naming the limiting station (A is checked
    /// first) and std::invalid_argument for unknown or identical stations.
    ParityAnnouncement establish_shared(const std::string& station_a, const std::string& station_b,
                                        std::size_t length);

private:
    struct Material {
        BitString bits;
        std::size_t offset = 0;
    };
    const Material& at(const std::string& station) const;

    std::map<std::string, Material> stations_;
};

/// Station-side recovery of the partner key: parity xor own segment.
BitString recover_partner_key(const BitString& parity, const BitString& own_segment);

}  // namespace satqkd
