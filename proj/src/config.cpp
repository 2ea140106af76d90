#include "satqkd/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>

#include "satqkd/errors.hpp"

namespace satqkd {

namespace {

enum class Dim { none, length, time, rate, angle, loss, temperature };

struct Unit {
    Dim dim;
    double factor;
};

const std::map<std::string, Unit, std::less<>>& unit_table() {
    static const std::map<std::string, Unit, std::less<>> table = {
        {"", {Dim::none, 1.0}},
        {"m", {Dim::length, 1.0}},       {"km", {Dim::length, 1e3}},     {"cm", {Dim::length, 1e-2}},
        {"mm", {Dim::length, 1e-3}},     {"um", {Dim::length, 1e-6}},    {"nm", {Dim::length, 1e-9}},
        {"s", {Dim::time, 1.0}},         {"ms", {Dim::time, 1e-3}},      {"us", {Dim::time, 1e-6}},
        {"ns", {Dim::time, 1e-9}},       {"ps", {Dim::time, 1e-12}},     {"Hz", {Dim::rate, 1.0}},
        {"kHz", {Dim::rate, 1e3}},       {"MHz", {Dim::rate, 1e6}},      {"GHz", {Dim::rate, 1e9}},
        {"cps", {Dim::rate, 1.0}},       {"kcps", {Dim::rate, 1e3}},     {"Mcps", {Dim::rate, 1e6}},
        {"rad", {Dim::angle, 1.0}},      {"mrad", {Dim::angle, 1e-3}},   {"urad", {Dim::angle, 1e-6}},
        {"deg", {Dim::angle, constants::pi / 180.0}},
        {"dB", {Dim::loss, 1.0}},        {"K", {Dim::temperature, 1.0}},
    };
    return table;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> items;
    if (trim(s).empty()) {
        return items;
    }
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        items.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return items;
}

struct Quantity {
    double value;
    std::string_view unit;
};

Quantity split_quantity(std::string_view text, const std::string& key) {
    text = trim(text);
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (!text.empty() && text.front() == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || !std::isfinite(v)) {
        throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, text), key);
    }
    return {v, trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)))};
}

double convert(Quantity q, std::string_view canonical, const std::string& key) {
    const auto& table = unit_table();
    const auto from = table.find(q.unit);
    const auto to = table.find(canonical);
    if (from == table.end()) {
        throw ConfigError(fmt::format("{}: unknown unit '{}'", key, q.unit), key);
    }
    if (to == table.end() || from->second.dim != to->second.dim) {
        throw ConfigError(fmt::format("{}: unit '{}' is not convertible to '{}'", key, q.unit,
                                      canonical.empty() ? "a plain number" : canonical),
                          key);
    }
    if (q.unit == canonical) {
        return q.value;
    }
    return q.value * from->second.factor / to->second.factor;
}

std::uint64_t parse_count(std::string_view text, const std::string& key) {
    text = trim(text);
    std::uint64_t n = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec == std::errc{} && ptr == text.data() + text.size()) {
        return n;
    }
    const Quantity q = split_quantity(text, key);
    if (!q.unit.empty() || q.value < 0 || q.value > 9007199254740992.0 || std::floor(q.value) != q.value) {
        throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, text), key);
    }
    return static_cast<std::uint64_t>(q.value);
}

bool parse_flag(std::string_view text, const std::string& key) {
    text = trim(text);
    if (text == "true" || text == "yes" || text == "on" || text == "1") {
        return true;
    }
    if (text == "false" || text == "no" || text == "off" || text == "0") {
        return false;
    }
    throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, text), key);
}

std::string format_quantity(double v, std::string_view unit) {
    return unit.empty() ? fmt::format("{}", v) : fmt::format("{} {}", v, unit);
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(ScenarioConfig&, std::string_view, const std::string&)> set;
    /// nullopt: omitted from the echo.
    std::function<std::optional<std::string>(const ScenarioConfig&)> get;
};

template <class T>
using Accessor = std::function<T&(ScenarioConfig&)>;

template <class T>
const T& read(const Accessor<T>& access, const ScenarioConfig& c) {
    return access(const_cast<ScenarioConfig&>(c));
}

/// `bare_unit` is assumed when the value carries no suffix; empty means a
/// suffix is mandatory for dimensional quantities.
Field quantity(std::string section, std::string key, std::string canonical, Accessor<double> access,
               std::string bare_unit = {}) {
    const bool dimensionless = canonical.empty();
    Field f{std::move(section), std::move(key), {}, {}};
    f.set = [=](ScenarioConfig& c, std::string_view text, const std::string& name) {
        Quantity q = split_quantity(text, name);
        if (q.unit.empty() && !dimensionless) {
            if (bare_unit.empty()) {
                throw ConfigError(fmt::format("{}: missing unit (expected e.g. '{} {}')", name, q.value, canonical),
                                  name);
            }
            q.unit = bare_unit;
        }
        access(c) = convert(q, canonical, name);
    };
    f.get = [=](const ScenarioConfig& c) -> std::optional<std::string> {
        return format_quantity(read(access, c), canonical);
    };
    return f;
}

Field decibels(std::string section, std::string key, std::function<Decibels&(ScenarioConfig&)> access) {
    return quantity(std::move(section), std::move(key), "dB",
                    [access](ScenarioConfig& c) -> double& { return access(c).value; });
}

Field count(std::string section, std::string key, Accessor<std::uint64_t> access) {
    Field f{std::move(section), std::move(key), {}, {}};
    f.set = [=](ScenarioConfig& c, std::string_view text, const std::string& name) {
        access(c) = parse_count(text, name);
    };
    f.get = [=](const ScenarioConfig& c) -> std::optional<std::string> { return fmt::format("{}", read(access, c)); };
    return f;
}

Field quantity_list(std::string section, std::string key, std::string canonical,
                    Accessor<std::vector<double>> access) {
    Field f{std::move(section), std::move(key), {}, {}};
    f.set = [=](ScenarioConfig& c, std::string_view text, const std::string& name) {
        std::vector<double> values;
        for (std::string_view item : split_list(text)) {
            const Quantity q = split_quantity(item, name);
            if (q.unit.empty()) {
                throw ConfigError(fmt::format("{}: missing unit on list element '{}'", name, item), name);
            }
            values.push_back(convert(q, canonical, name));
        }
        access(c) = std::move(values);
    };
    f.get = [=](const ScenarioConfig& c) -> std::optional<std::string> {
        std::string out;
        for (double v : read(access, c)) {
            if (!out.empty()) {
                out += ", ";
            }
            out += format_quantity(v, canonical);
        }
        return out;
    };
    return f;
}

std::vector<double> expand_range(std::string_view text, const std::string& name) {
    const auto items = split_list(text);
    if (items.size() != 3) {
        throw ConfigError(fmt::format("{}: expected 'start, stop, step'", name), name);
    }
    double bounds[3];
    for (std::size_t i = 0; i < 3; ++i) {
        const Quantity q = split_quantity(items[i], name);
        if (q.unit.empty()) {
            throw ConfigError(fmt::format("{}: missing unit on '{}'", name, items[i]), name);
        }
        bounds[i] = convert(q, "dB", name);
    }
    const double start = bounds[0];
    const double stop = bounds[1];
    const double step = bounds[2];
    if (!(step > 0.0) || stop < start) {
        throw ConfigError(fmt::format("{}: need stop >= start and a positive step", name), name);
    }
    const double steps = std::floor((stop - start) / step + 1e-9);
    if (steps > 1e6) {
        throw ConfigError(fmt::format("{}: grid has more than a million points", name), name);
    }
    std::vector<double> grid;
    for (std::uint64_t k = 0; k <= static_cast<std::uint64_t>(steps); ++k) {
        // Snap to 12 significant digits so 0.2 dB steps land on 6.4, not 6.4000000000000004.
        const std::string snapped = fmt::format("{:.12g}", start + static_cast<double>(k) * step);
        double v = 0.0;
        std::from_chars(snapped.data(), snapped.data() + snapped.size(), v);
        grid.push_back(v);
    }
    return grid;
}

const std::vector<Field>& schema() {
    static const std::vector<Field> fields = [] {
        std::vector<Field> f;
        f.push_back(count("run", "seed", [](ScenarioConfig& c) -> std::uint64_t& { return c.seed; }));

        f.push_back(quantity("link_model", "k_div", "", [](ScenarioConfig& c) -> double& { return c.link_model.k_div; }));
        f.push_back(quantity("link_model", "k_pointing", "",
                             [](ScenarioConfig& c) -> double& { return c.link_model.k_pointing; }));
        f.push_back(quantity("link_model", "fried_parameter", "m",
                             [](ScenarioConfig& c) -> double& { return c.link_model.fried_parameter_m; }));
        f.push_back(Field{"link_model", "fried_limits_uplink_diffraction",
                          [](ScenarioConfig& c, std::string_view text, const std::string& name) {
                              c.link_model.fried_limits_uplink_diffraction = parse_flag(text, name);
                          },
                          [](const ScenarioConfig& c) -> std::optional<std::string> {
                              return std::string(c.link_model.fried_limits_uplink_diffraction ? "true" : "false");
                          }});
        f.push_back(quantity("link_model", "airmass_cap", "",
                             [](ScenarioConfig& c) -> double& { return c.link_model.airmass_cap; }));

        f.push_back(decibels("table1", "zenith_attenuation",
                             [](ScenarioConfig& c) -> Decibels& { return c.table1.zenith_attenuation_db; }));
        f.push_back(decibels("table1", "uplink_turbulence_penalty",
                             [](ScenarioConfig& c) -> Decibels& { return c.table1.uplink_turbulence_penalty_db; }));
        f.push_back(decibels("table1", "terminal_optics_loss",
                             [](ScenarioConfig& c) -> Decibels& { return c.table1.terminal_optics_db; }));

        f.push_back(Field{"link", "kind",
                          [](ScenarioConfig& c, std::string_view text, const std::string& name) {
                              LinkKind kind{};
                              try {
                                  kind = link_kind_from_string(std::string(trim(text)));
                              } catch (const std::invalid_argument& e) {
                                  throw ConfigError(fmt::format("{}: {}", name, e.what()), name);
                              }
                              if (kind == LinkKind::double_pass) {
                                  throw ConfigError(name + ": double_pass links are composed from two legs in code",
                                                    name);
                              }
                              c.link.kind = kind;
                          },
                          [](const ScenarioConfig& c) -> std::optional<std::string> {
                              return std::string(to_string(c.link.kind));
                          }});
        f.push_back(quantity("link", "tx_aperture", "m",
                             [](ScenarioConfig& c) -> double& { return c.link.tx.aperture_diameter_m; }));
        f.push_back(quantity("link", "rx_aperture", "m",
                             [](ScenarioConfig& c) -> double& { return c.link.rx.aperture_diameter_m; }));
        f.push_back(quantity("link", "tx_pointing_jitter", "rad",
                             [](ScenarioConfig& c) -> double& { return c.link.tx.pointing_jitter_rms_rad; }));
        f.push_back(quantity("link", "rx_pointing_jitter", "rad",
                             [](ScenarioConfig& c) -> double& { return c.link.rx.pointing_jitter_rms_rad; }));
        f.push_back(decibels("link", "tx_optics_loss",
                             [](ScenarioConfig& c) -> Decibels& { return c.link.tx.optics_transmission_db; }));
        f.push_back(decibels("link", "rx_optics_loss",
                             [](ScenarioConfig& c) -> Decibels& { return c.link.rx.optics_transmission_db; }));
        f.push_back(quantity("link", "wavelength", "m", [](ScenarioConfig& c) -> double& { return c.link.wavelength.metres; }));
        f.push_back(quantity("link", "range", "m", [](ScenarioConfig& c) -> double& { return c.link.range_m; }));
        f.push_back(quantity("link", "elevation", "deg", [](ScenarioConfig& c) -> double& { return c.link.elevation_deg; }));
        f.push_back(decibels("link", "zenith_attenuation",
                             [](ScenarioConfig& c) -> Decibels& { return c.link.zenith_attenuation_db; }));
        f.push_back(decibels("link", "uplink_turbulence_penalty",
                             [](ScenarioConfig& c) -> Decibels& { return c.link.uplink_turbulence_penalty_db; }));
        f.push_back(decibels("link", "downlink_turbulence_residual",
                             [](ScenarioConfig& c) -> Decibels& { return c.link.downlink_turbulence_residual_db; }));

        f.push_back(quantity("orbit", "altitude", "m", [](ScenarioConfig& c) -> double& { return c.orbit.altitude_m; }));

        f.push_back(quantity("pass", "max_elevation", "deg",
                             [](ScenarioConfig& c) -> double& { return c.pass.max_elevation_deg; }));
        f.push_back(quantity("pass", "min_elevation", "deg",
                             [](ScenarioConfig& c) -> double& { return c.pass.min_elevation_deg; }));
        f.push_back(quantity("pass", "timestep", "s", [](ScenarioConfig& c) -> double& { return c.pass.timestep_s; }));

        f.push_back(quantity("source", "pair_rate", "cps",
                             [](ScenarioConfig& c) -> double& { return c.system.source.pair_rate_cps; }));
        f.push_back(quantity("source", "intrinsic_qber", "",
                             [](ScenarioConfig& c) -> double& { return c.system.source.intrinsic_qber; }));
        f.push_back(decibels("source", "arm_loss_a",
                             [](ScenarioConfig& c) -> Decibels& { return c.system.source.arm_loss_a_db; }));
        f.push_back(decibels("source", "arm_loss_b",
                             [](ScenarioConfig& c) -> Decibels& { return c.system.source.arm_loss_b_db; }));
        f.push_back(quantity("source", "link_loss_share_a", "",
                             [](ScenarioConfig& c) -> double& { return c.system.link_loss_share_a; }));

        f.push_back(quantity("wcp", "pulse_rate", "Hz", [](ScenarioConfig& c) -> double& { return c.wcp.pulse_rate_hz; }));
        f.push_back(quantity("wcp", "mu_signal", "", [](ScenarioConfig& c) -> double& { return c.wcp.mean_photon_signal; }));
        f.push_back(quantity("wcp", "mu_decoy", "", [](ScenarioConfig& c) -> double& { return c.wcp.mean_photon_decoy; }));
        f.push_back(quantity("wcp", "signal_fraction", "",
                             [](ScenarioConfig& c) -> double& { return c.wcp.signal_fraction; }));

        f.push_back(quantity("detector", "efficiency", "",
                             [](ScenarioConfig& c) -> double& { return c.system.det_a.efficiency; }));
        f.push_back(quantity(
            "detector", "dark_a_cps", "cps", [](ScenarioConfig& c) -> double& { return c.system.det_a.dark_fit_a_cps; },
            "cps"));
        f.push_back(quantity("detector", "dark_b_per_K", "",
                             [](ScenarioConfig& c) -> double& { return c.system.det_a.dark_fit_b_per_k; }));
        f.push_back(quantity(
            "detector", "dark_c_cps", "cps", [](ScenarioConfig& c) -> double& { return c.system.det_a.dark_fit_c_cps; },
            "cps"));
        f.push_back(quantity(
            "detector", "dead_time_ns", "s", [](ScenarioConfig& c) -> double& { return c.system.det_a.dead_time_s; },
            "ns"));
        f.push_back(quantity(
            "detector", "jitter_ns", "s", [](ScenarioConfig& c) -> double& { return c.system.det_a.jitter_rms_s; },
            "ns"));
        f.push_back(quantity(
            "detector", "temperature_K", "K", [](ScenarioConfig& c) -> double& { return c.system.det_a.temperature_k; },
            "K"));
        f.push_back(Field{"detector", "detectors_per_receiver",
                          [](ScenarioConfig& c, std::string_view text, const std::string& name) {
                              const std::uint64_t n = parse_count(text, name);
                              if (n < 1 || n > 64) {
                                  throw ConfigError(name + ": expected 1 to 64 detectors", name);
                              }
                              c.system.det_a.detectors_per_receiver = static_cast<int>(n);
                          },
                          [](const ScenarioConfig& c) -> std::optional<std::string> {
                              return fmt::format("{}", c.system.det_a.detectors_per_receiver);
                          }});

        f.push_back(quantity("background", "stray_a", "cps",
                             [](ScenarioConfig& c) -> double& { return c.system.bg_a.stray_rate_cps; }));
        f.push_back(quantity("background", "stray_b", "cps",
                             [](ScenarioConfig& c) -> double& { return c.system.bg_b.stray_rate_cps; }));

        f.push_back(quantity("coincidence", "window", "s", [](ScenarioConfig& c) -> double& { return c.system.window_s; }));

        f.push_back(quantity("overhead", "timetag_bits_per_event", "",
                             [](ScenarioConfig& c) -> double& { return c.overhead.timetag_bits_per_event; }));
        f.push_back(quantity("overhead", "basis_bits_per_sifted", "",
                             [](ScenarioConfig& c) -> double& { return c.overhead.basis_bits_per_sifted; }));
        f.push_back(quantity("overhead", "ec_efficiency", "",
                             [](ScenarioConfig& c) -> double& { return c.overhead.ec_efficiency; }));
        f.push_back(quantity("overhead", "framing_overhead", "",
                             [](ScenarioConfig& c) -> double& { return c.overhead.framing_overhead; }));
        f.push_back(quantity("overhead", "qber_threshold", "",
                             [](ScenarioConfig& c) -> double& { return c.overhead.qber_threshold; }));

        f.push_back(quantity_list("sweep", "temperatures", "K",
                                  [](ScenarioConfig& c) -> std::vector<double>& { return c.sweep.temperatures_k; }));
        f.push_back(quantity_list("sweep", "loss", "dB",
                                  [](ScenarioConfig& c) -> std::vector<double>& { return c.sweep.losses_db; }));
        f.push_back(Field{"sweep", "loss_range",
                          [](ScenarioConfig& c, std::string_view text, const std::string& name) {
                              c.sweep.losses_db = expand_range(text, name);
                          },
                          [](const ScenarioConfig&) -> std::optional<std::string> { return std::nullopt; }});
        f.push_back(Field{"sweep", "qber_threshold",
                          [](ScenarioConfig& c, std::string_view text, const std::string& name) {
                              c.sweep.qber_threshold = convert(split_quantity(text, name), "", name);
                          },
                          [](const ScenarioConfig& c) -> std::optional<std::string> {
                              if (!c.sweep.qber_threshold) {
                                  return std::nullopt;
                              }
                              return fmt::format("{}", *c.sweep.qber_threshold);
                          }});

        f.push_back(Field{"protocol", "name",
                          [](ScenarioConfig& c, std::string_view text, const std::string& name) {
                              const std::string value(trim(text));
                              if (value != "bb84" && value != "bbm92") {
                                  throw ConfigError(
                                      fmt::format("{}: unknown protocol '{}' (expected bb84 or bbm92)", name, value),
                                      name);
                              }
                              c.protocol.name = value;
                          },
                          [](const ScenarioConfig& c) -> std::optional<std::string> { return c.protocol.name; }});
        f.push_back(count("protocol", "n", [](ScenarioConfig& c) -> std::uint64_t& { return c.protocol.n; }));
        f.push_back(decibels("protocol", "loss", [](ScenarioConfig& c) -> Decibels& { return c.protocol.loss_db; }));
        f.push_back(quantity("protocol", "intrinsic_error", "",
                             [](ScenarioConfig& c) -> double& { return c.protocol.intrinsic_error; }));
        f.push_back(quantity("protocol", "sample_fraction", "",
                             [](ScenarioConfig& c) -> double& { return c.protocol.sample_fraction; }));

        f.push_back(count("relay", "station_a_key_bits",
                          [](ScenarioConfig& c) -> std::uint64_t& { return c.relay.station_a_key_bits; }));
        f.push_back(count("relay", "station_b_key_bits",
                          [](ScenarioConfig& c) -> std::uint64_t& { return c.relay.station_b_key_bits; }));
        f.push_back(Field{"relay", "request_bits",
                          [](ScenarioConfig& c, std::string_view text, const std::string& name) {
                              c.relay.request_bits = parse_count(text, name);
                          },
                          [](const ScenarioConfig& c) -> std::optional<std::string> {
                              if (!c.relay.request_bits) {
                                  return std::nullopt;
                              }
                              return fmt::format("{}", *c.relay.request_bits);
                          }});
        f.push_back(decibels("relay", "link_loss", [](ScenarioConfig& c) -> Decibels& { return c.relay.link_loss_db; }));
        return f;
    }();
    return fields;
}

const Field* find_field(std::string_view section, std::string_view key) {
    for (const Field& f : schema()) {
        if (f.section == section && f.key == key) {
            return &f;
        }
    }
    return nullptr;
}

bool known_section(std::string_view section) {
    return std::any_of(schema().begin(), schema().end(), [&](const Field& f) { return f.section == section; });
}

template <class Fn>
void checked(const std::string& key, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(fmt::format("{}: {}", key, e.what()), key);
    }
}

void validate(ScenarioConfig& c) {
    c.link.model = c.link_model;
    c.table1.model = c.link_model;
    c.system.det_b = c.system.det_a;

    checked("link_model", [&] {
        if (!(c.link_model.k_div > 0.0) || !(c.link_model.k_pointing >= 0.0) || !(c.link_model.fried_parameter_m > 0.0) ||
            !(c.link_model.airmass_cap >= 1.0)) {
            throw std::invalid_argument("k_div and fried_parameter must be positive, airmass_cap at least 1");
        }
    });
    checked("link", [&] {
        if (c.link.has_ground_terminal() && c.link.elevation_deg <= 0.0) {
            throw std::invalid_argument("elevation must be positive for ground links");
        }
        c.link.validate();
    });
    checked("orbit.altitude", [&] { c.orbit.validate(); });
    if (!(c.pass.timestep_s > 0.0)) {
        throw ConfigError("pass.timestep: must be positive", "pass.timestep");
    }
    if (!(c.pass.min_elevation_deg > 0.0 && c.pass.max_elevation_deg <= 90.0)) {
        throw ConfigError("pass: elevations must lie in (0, 90] deg", "pass.min_elevation");
    }
    if (c.pass.max_elevation_deg < c.pass.min_elevation_deg) {
        throw ConfigError(fmt::format("pass.max_elevation ({} deg) is below pass.min_elevation ({} deg)",
                                      c.pass.max_elevation_deg, c.pass.min_elevation_deg),
                          "pass.max_elevation");
    }
    checked("detector", [&] { c.system.det_a.validate(); });
    checked("source", [&] {
        if (!(c.system.link_loss_share_a >= 0.0 && c.system.link_loss_share_a <= 1.0)) {
            throw std::invalid_argument("link_loss_share_a outside [0, 1]");
        }
        c.system.validate();
    });
    checked("wcp", [&] { c.wcp.validate(); });
    checked("overhead", [&] { c.overhead.validate(); });
    for (double t : c.sweep.temperatures_k) {
        checked("sweep.temperatures", [&] {
            DetectorParams d = c.system.det_a;
            d.temperature_k = t;
            d.validate();
        });
    }
    for (double l : c.sweep.losses_db) {
        if (!(l >= 0.0)) {
            throw ConfigError(fmt::format("sweep.loss: negative loss {} dB", l), "sweep.loss");
        }
    }
    if (c.sweep.qber_threshold && !(*c.sweep.qber_threshold > 0.0 && *c.sweep.qber_threshold < 0.5)) {
        throw ConfigError("sweep.qber_threshold: must lie in (0, 0.5)", "sweep.qber_threshold");
    }
    if (c.protocol.n < 1) {
        throw ConfigError("protocol.n: must be at least 1", "protocol.n");
    }
    if (!(c.protocol.loss_db.value >= 0.0)) {
        throw ConfigError("protocol.loss: must be non-negative", "protocol.loss");
    }
    if (!(c.protocol.intrinsic_error >= 0.0 && c.protocol.intrinsic_error <= 0.5)) {
        throw ConfigError("protocol.intrinsic_error: must lie in [0, 0.5]", "protocol.intrinsic_error");
    }
    if (!(c.protocol.sample_fraction > 0.0 && c.protocol.sample_fraction < 1.0)) {
        throw ConfigError("protocol.sample_fraction: must lie in (0, 1)", "protocol.sample_fraction");
    }
    if (!(c.relay.link_loss_db.value >= 0.0)) {
        throw ConfigError("relay.link_loss: must be non-negative", "relay.link_loss");
    }
}

}  // namespace

void ScenarioConfig::require(std::initializer_list<std::string_view> names) const {
    for (std::string_view name : names) {
        if (!has_section(name)) {
            throw ConfigError(fmt::format("missing required section [{}]", name), std::string(name));
        }
    }
}

double parse_quantity(std::string_view text, std::string_view canonical_unit, const std::string& key) {
    Quantity q = split_quantity(text, key);
    if (q.unit.empty()) {
        q.unit = canonical_unit;
    }
    return convert(q, canonical_unit, key);
}

ScenarioConfig parse_config(std::istream& in, const std::string& origin) {
    namespace pt = boost::property_tree;
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    pt::ptree tree;
    try {
        std::istringstream stream(text);
        pt::ini_parser::read_ini(stream, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("{}:{}: {}", origin, e.line(), e.message()));
    }

    ScenarioConfig cfg;
    // The INI reader drops sections without keys; they still count as present.
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
        const std::string_view t = trim(line);
        if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
            const std::string section(trim(t.substr(1, t.size() - 2)));
            if (!known_section(section)) {
                throw ConfigError(fmt::format("{}: unknown section [{}]", origin, section), section);
            }
            cfg.sections.insert(section);
        }
    }
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError(fmt::format("{}: key '{}' outside any section", origin, section), section);
        }
        if (!known_section(section)) {
            throw ConfigError(fmt::format("{}: unknown section [{}]", origin, section), section);
        }
        cfg.sections.insert(section);
        bool saw_loss = false;
        for (const auto& [key, node] : body) {
            const std::string name = section + "." + key;
            const Field* field = find_field(section, key);
            if (field == nullptr) {
                throw ConfigError(fmt::format("{}: unknown key '{}'", origin, name), name);
            }
            if (key == "loss" || key == "loss_range") {
                if (section == "sweep" && saw_loss) {
                    throw ConfigError(fmt::format("{}: give either sweep.loss or sweep.loss_range", origin), name);
                }
                saw_loss = saw_loss || section == "sweep";
            }
            field->set(cfg, node.data(), name);
        }
    }
    validate(cfg);
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    }
    return parse_config(in, path.string());
}

std::string config_echo(const ScenarioConfig& cfg) {
    std::string out;
    std::string current;
    for (const Field& f : schema()) {
        const auto value = f.get(cfg);
        if (!value) {
            continue;
        }
        if (f.section != current) {
            if (!current.empty()) {
                out += '\n';
            }
            out += fmt::format("[{}]\n", f.section);
            current = f.section;
        }
        out += value->empty() ? fmt::format("{} =\n", f.key) : fmt::format("{} = {}\n", f.key, *value);
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace satqkd
