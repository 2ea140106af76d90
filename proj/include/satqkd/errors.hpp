#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace satqkd {

/// A requested operating point cannot be reached (e.g. QBER already above
/// threshold at zero loss).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameter estimation had no data to work with.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A trusted node was asked for more key material than a station holds.
class KeyDepletionError : public std::runtime_error {
public:
    KeyDepletionError(std::string station, std::size_t available, std::size_t requested);

    const std::string& station() const noexcept { return station_; }
    std::size_t available() const noexcept { return available_; }
    std::size_t requested() const noexcept { return requested_; }

private:
    std::string station_;
    std::size_t available_;
    std::size_t requested_;
};

/// Malformed or incomplete scenario configuration. `key()` names the
/// offending "section.key" (or section) when one is known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, std::string key = {});

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace satqkd
