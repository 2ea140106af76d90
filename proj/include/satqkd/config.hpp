#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "satqkd/key_rate.hpp"
#include "satqkd/link_budget.hpp"
#include "satqkd/orbit.hpp"
#include "satqkd/qber.hpp"

namespace satqkd {

struct PassSettings {
    double max_elevation_deg = 90.0;
    double min_elevation_deg = 10.0;
    double timestep_s = 1.0;
};

struct SweepSettings {
    std::vector<double> temperatures_k{288.15};
    std::vector<double> losses_db;
    std::optional<double> qber_threshold;
};

struct ProtocolSettings {
    std::string name = "bbm92";
    std::uint64_t n = 1000000;
    /// Total link loss; BBM92 splits it with source.link_loss_share_a.
    Decibels loss_db{0.0};
    /// BB84 only; BBM92 uses source.intrinsic_qber.
    double intrinsic_error = 0.01;
    double sample_fraction = 0.1;
};

struct RelaySettings {
    std::uint64_t station_a_key_bits = 1000;
    std::uint64_t station_b_key_bits = 1000;
    /// Unset: the shorter of the two keys is requested.
    std::optional<std::uint64_t> request_bits;
    Decibels link_loss_db{0.0};
};

/// Scenario file contents with defaults filled in. Values are in SI units
/// except elevations (deg), losses (dB) and temperatures (K).
struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::set<std::string, std::less<>> sections;

    LinkModel link_model{};
    LinkScenario link{};
    ReferenceCalibration table1{};
    CircularOrbit orbit{};
    PassSettings pass{};
    Bbm92System system{};
    WcpSourceParams wcp{};
    OverheadParams overhead{};
    SweepSettings sweep{};
    ProtocolSettings protocol{};
    RelaySettings relay{};

    bool has_section(std::string_view name) const { return sections.count(name) > 0; }
    /// Throws ConfigError naming the first missing section.
    void require(std::initializer_list<std::string_view> names) const;
};

/// Parses the INI-style scenario format. Throws ConfigError for syntax
/// errors, unknown sections or keys, bad units and invalid values.
ScenarioConfig parse_config(std::istream& in, const std::string& origin = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

/// Every key of every section with its resolved value in canonical units.
/// Parsing the echo reproduces the configuration exactly.
std::string config_echo(const ScenarioConfig& cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

/// Number with an optional unit suffix ("500 km"), converted to
/// `canonical_unit`. A missing suffix means the canonical unit.
double parse_quantity(std::string_view text, std::string_view canonical_unit, const std::string& key);

}  // namespace satqkd
