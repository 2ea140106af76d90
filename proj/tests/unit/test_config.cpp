#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "satqkd/config.hpp"
#include "satqkd/errors.hpp"

using namespace satqkd;

namespace {

ScenarioConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.cfg");
}

std::string error_key(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("quantities with units") {
    CHECK(parse_quantity("500 km", "m", "k") == 500e3);
    CHECK(parse_quantity("2 ns", "s", "k") == doctest::Approx(2e-9).epsilon(1e-15));
    CHECK(parse_quantity("1 Mcps", "cps", "k") == 1e6);
    CHECK(parse_quantity("0.6 urad", "rad", "k") == doctest::Approx(0.6e-6).epsilon(1e-15));
    CHECK(parse_quantity("42", "m", "k") == 42.0);
    CHECK_THROWS_AS(parse_quantity("5 parsec", "m", "k"), ConfigError);
    CHECK_THROWS_AS(parse_quantity("5 ns", "m", "k"), ConfigError);
    CHECK_THROWS_AS(parse_quantity("abc", "m", "k"), ConfigError);
}

TEST_CASE("a representative scenario") {
    const auto cfg = parse(R"(# comment
[run]
seed = 77
[orbit]
altitude = 500 km
[pass]
max_elevation = 60 deg
min_elevation = 15 deg
timestep = 500 ms
[detector]
efficiency = 0.45
temperature_K = 253.15
dead_time_ns = 26
[coincidence]
window = 1.5 ns
[sweep]
temperatures = 250 K, 300 K
loss = 0 dB, 6.4 dB, 30 dB
)");
    CHECK(cfg.seed == 77);
    CHECK(cfg.orbit.altitude_m == 500e3);
    CHECK(cfg.pass.max_elevation_deg == 60.0);
    CHECK(cfg.pass.timestep_s == 0.5);
    CHECK(cfg.system.det_a.efficiency == 0.45);
    CHECK(cfg.system.det_b.temperature_k == 253.15);
    CHECK(cfg.system.det_a.dead_time_s == doctest::Approx(26e-9));
    CHECK(cfg.system.window_s == doctest::Approx(1.5e-9));
    CHECK(cfg.sweep.temperatures_k == std::vector<double>{250.0, 300.0});
    CHECK(cfg.sweep.losses_db == std::vector<double>{0.0, 6.4, 30.0});
    CHECK(cfg.has_section("orbit"));
    CHECK_FALSE(cfg.has_section("relay"));
    CHECK_THROWS_AS(cfg.require({"orbit", "relay"}), ConfigError);
    CHECK_NOTHROW(cfg.require({"orbit", "pass"}));
}

TEST_CASE("empty sections count as present") {
    const auto cfg = parse("[source]\n[detector]\n");
    CHECK(cfg.has_section("source"));
    CHECK(cfg.has_section("detector"));
}

TEST_CASE("loss ranges land exactly on decimal grid points") {
    const auto cfg = parse("[sweep]\nloss_range = 0 dB, 40 dB, 0.2 dB\n");
    REQUIRE(cfg.sweep.losses_db.size() == 201);
    CHECK(cfg.sweep.losses_db[32] == 6.4);
    CHECK(cfg.sweep.losses_db.back() == 40.0);
    CHECK(error_key("[sweep]\nloss_range = 0 dB, 10 dB\n") == "sweep.loss_range");
    CHECK(error_key("[sweep]\nloss = 1 dB\nloss_range = 0 dB, 10 dB, 1 dB\n") == "sweep.loss_range");
}

TEST_CASE("configuration errors name the offending key") {
    CHECK(error_key("[orbit]\naltitude = 500\n") == "orbit.altitude");
    CHECK(error_key("[orbit]\naltitud = 500 km\n") == "orbit.altitud");
    CHECK(error_key("[orbits]\n") == "orbits");
    CHECK(error_key("[protocol]\nname = e91\n") == "protocol.name");
    CHECK(error_key("[pass]\nmax_elevation = 5 deg\nmin_elevation = 10 deg\n") == "pass.max_elevation");
    CHECK(error_key("[link]\nkind = double_pass\n") == "link.kind");
    CHECK(error_key("[detector]\nefficiency = 0\n") == "detector");
    CHECK(error_key("[sweep]\ntemperatures = 250, 260\n") == "sweep.temperatures");
    CHECK_THROWS_AS(parse("[orbit\naltitude = 1 km\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/scenario.cfg"), ConfigError);
}

TEST_CASE("the echo reproduces the configuration") {
    for (const char* name : {"table1.cfg", "fig5.cfg", "fig6.cfg", "micius_pass.cfg", "relay_demo.cfg",
                             "protocol_mc.cfg", "protocol_bb84.cfg"}) {
        CAPTURE(name);
        const auto cfg = load_config(std::filesystem::path(SATQKD_PRESET_DIR) / name);
        const std::string echo = config_echo(cfg);
        const auto again = parse(echo);
        CHECK(config_echo(again) == echo);
        CHECK(again.seed == cfg.seed);
        CHECK(again.sweep.losses_db == cfg.sweep.losses_db);
        CHECK(again.system.window_s == cfg.system.window_s);
    }
}

TEST_CASE("fnv1a") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}
