#include "satqkd/units.hpp"

#include <cmath>
#include <stdexcept>

#include "satqkd/errors.hpp"

namespace satqkd {

Transmittance db_to_transmittance(Decibels loss) {
    if (!std::isfinite(loss.value)) {
        throw std::invalid_argument("db_to_transmittance: loss must be finite");
    }
    return Transmittance{std::pow(10.0, -loss.value / 10.0)};
}

Decibels transmittance_to_db(Transmittance t) {
    if (std::isnan(t.eta) || t.eta > 1.0) {
        throw std::invalid_argument("transmittance_to_db: eta must lie in (0, 1]");
    }
    if (t.eta <= 0.0) {
        throw std::domain_error("transmittance_to_db: eta <= 0 is a total blockage");
    }
    return Decibels{-10.0 * std::log10(t.eta)};
}

KeyDepletionError::KeyDepletionError(std::string station, std::size_t available, std::size_t requested)
    : std::runtime_error("key material depleted at station '" + station + "': " + std::to_string(available) +
                         " bits remain, " + std::to_string(requested) + " requested"),
      station_(std::move(station)),
      available_(available),
      requested_(requested) {}

ConfigError::ConfigError(const std::string& message, std::string key)
    : std::runtime_error(message), key_(std::move(key)) {}

}  // namespace satqkd
