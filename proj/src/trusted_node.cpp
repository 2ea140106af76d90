#include "satqkd/trusted_node.hpp"

#include <fmt/format.h>

#include <stdexcept>

#include "satqkd/errors.hpp"

namespace satqkd {

BitString xor_relay(const BitString& key_a, const BitString& key_b) {
    if (key_a.size() != key_b.size()) {
        throw std::invalid_argument(fmt::format("xor_relay: key lengths differ ({} vs {})", key_a.size(), key_b.size()));
    }
    BitString parity(key_a.size());
    for (std::size_t i = 0; i < key_a.size(); ++i) {
        parity[i] = static_cast<std::uint8_t>((key_a[i] ^ key_b[i]) & 1U);
    }
    return parity;
}

BitString recover_partner_key(const BitString& parity, const BitString& own_segment) {
    return xor_relay(parity, own_segment);
}

void TrustedNodeStore::deposit(const std::string& station, const BitString& bits) {
    auto& m = stations_[station];
    m.bits.insert(m.bits.end(), bits.begin(), bits.end());
}

bool TrustedNodeStore::has_station(const std::string& station) const { return stations_.count(station) > 0; }

const TrustedNodeStore::Material& TrustedNodeStore::at(const std::string& station) const {
    const auto it = stations_.find(station);
    if (it == stations_.end()) {
        throw std::invalid_argument("unknown station '" + station + "'");
    }
    return it->second;
}

std::size_t TrustedNodeStore::total(const std::string& station) const { return at(station).bits.size(); }
std::size_t TrustedNodeStore::consumed(const std::string& station) const { return at(station).offset; }
std::size_t TrustedNodeStore::remaining(const std::string& station) const {
    const auto& m = at(station);
    return m.bits.size() - m.offset;
}

ParityAnnouncement TrustedNodeStore::establish_shared(const std::string& station_a, const std::string& station_b,
                                                      std::size_t length) {
    if (station_a == station_b) {
        throw std::invalid_argument("establish_shared needs two distinct stations");
    }
    const auto& ma = at(station_a);
    const auto& mb = at(station_b);
    if (ma.bits.size() - ma.offset < length) {
        throw KeyDepletionError(station_a, ma.bits.size() - ma.offset, length);
    }
    if (mb.bits.size() - mb.offset < length) {
        throw KeyDepletionError(station_b, mb.bits.size() - mb.offset, length);
    }
    auto& a = stations_.at(station_a);
    auto& b = stations_.at(station_b);
    const auto a_first = a.bits.begin() + static_cast<std::ptrdiff_t>(a.offset);
    const auto b_first = b.bits.begin() + static_cast<std::ptrdiff_t>(b.offset);
    ParityAnnouncement out;
    out.station_a = station_a;
    out.station_b = station_b;
    out.offset_a = a.offset;
    out.offset_b = b.offset;
    out.parity = xor_relay(BitString(a_first, a_first + static_cast<std::ptrdiff_t>(length)),
                           BitString(b_first, b_first + static_cast<std::ptrdiff_t>(length)));
    a.offset += length;
    b.offset += length;
    return out;
}

}  // namespace satqkd
