#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "satqkd/cli.hpp"
#include "satqkd/config.hpp"
#include "satqkd/qber.hpp"

using namespace satqkd;
namespace fs = std::filesystem;

namespace {

const fs::path presets = SATQKD_PRESET_DIR;

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("satqkd_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

/// Data lines of a CSV file: comment header and column header removed.
std::vector<std::vector<std::string>> rows(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::vector<std::vector<std::string>> out;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        out.push_back(cells);
    }
    return out;
}

fs::path write_cfg(const TempDir& dir, const std::string& text) {
    const auto p = dir.path / "scenario.cfg";
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("table1 reproduces the reference losses") {
    TempDir d;
    const auto r = run({"table1", "--out", d.path.string()});
    CHECK(r.code == exit_ok);
    const auto t = rows(d.path / "table1.csv");
    REQUIRE(t.size() == 8);
    for (const auto& row : t) {
        CHECK(std::abs(std::stod(row.back())) <= 3.0);
    }
    const std::string text = slurp(d.path / "table1.csv");
    CHECK(text.rfind("# satqkd ", 0) == 0);
    CHECK(text.find("# config_hash ") != std::string::npos);
    CHECK(text.find("# seed 1\n") != std::string::npos);
    CHECK(fs::exists(d.path / "config_resolved.cfg"));
}

TEST_CASE("qber sweep output") {
    TempDir d;
    const auto r = run({"qber-sweep", "--config", (presets / "fig5.cfg").string(), "--out", d.path.string()});
    REQUIRE(r.code == exit_ok);
    const auto t = rows(d.path / "qber_sweep.csv");
    CHECK(t.size() == 11 * 121);
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i][0] == t[i - 1][0]) {
            CHECK(std::stod(t[i][6]) >= std::stod(t[i - 1][6]));
        }
    }
    const auto cfg = load_config(presets / "fig5.cfg");
    const double l300 = max_tolerable_loss(cfg.system, 300.0).loss.value;
    const std::string summary = slurp(d.path / "summary.txt");
    CHECK(summary.find(fmt::format("L*(300 K): {:.4f} dB", l300)) != std::string::npos);
    CHECK(summary.find("dL*/dT (least squares): -0.") != std::string::npos);
}

TEST_CASE("single temperature and single loss give a single row") {
    TempDir d;
    const auto cfg = write_cfg(d, "[source]\n[detector]\n[coincidence]\n[sweep]\ntemperatures = 273.15 K\nloss = 10 dB\n");
    const auto out = d.path / "out";
    CHECK(run({"qber-sweep", "--config", cfg.string(), "--out", out.string()}).code == exit_ok);
    CHECK(rows(out / "qber_sweep.csv").size() == 1);
}

TEST_CASE("key rate sweep output") {
    TempDir d;
    const auto r = run({"keyrate-sweep", "--config", (presets / "fig6.cfg").string(), "--out", d.path.string()});
    REQUIRE(r.code == exit_ok);
    const auto t = rows(d.path / "keyrate_sweep.csv");
    CHECK(t.size() == 201);
    bool saw_6_4 = false;
    for (const auto& row : t) {
        const double q = std::stod(row[1]);
        const double secure = std::stod(row[4]);
        if (q >= 0.11) {
            CHECK(secure == 0.0);
            CHECK(row[6] == "false");
        }
        if (row[0] == "6.4") {
            saw_6_4 = true;
            CHECK(secure >= 27.5e3);
            CHECK(secure <= 110e3);
            CHECK(std::stod(row[5]) >= 3.75e6);
            CHECK(std::stod(row[5]) <= 15e6);
        }
    }
    CHECK(saw_6_4);
}

TEST_CASE("pass simulation output") {
    TempDir d;
    const auto r = run({"pass-sim", "--config", (presets / "micius_pass.cfg").string(), "--out", d.path.string()});
    REQUIRE(r.code == exit_ok);
    const auto t = rows(d.path / "pass_timeseries.csv");
    CHECK(t.size() >= 430);
    double sum = 0.0;
    for (const auto& row : t) {
        sum += std::stod(row[8]);
    }
    CHECK(sum >= 1e5);
    CHECK(sum <= 1e7);
    CHECK(slurp(d.path / "pass_summary.txt").find("total secure bits:") != std::string::npos);
}

TEST_CASE("protocol Monte Carlo output") {
    TempDir d;
    const auto r = run({"protocol-mc", "--config", (presets / "protocol_mc.cfg").string(), "--out", d.path.string(),
                        "--dump-keys"});
    CHECK(r.code == exit_ok);
    CHECK(rows(d.path / "run_report.csv").size() == 1);
    CHECK(slurp(d.path / "mc_summary.txt").find("agreement within 3 sigma: yes") != std::string::npos);
    CHECK(fs::exists(d.path / "sifted_key_a.txt"));
    CHECK(fs::exists(d.path / "sifted_key_b.txt"));
}

TEST_CASE("noise-free protocol run produces identical keys") {
    TempDir d;
    const auto cfg = write_cfg(d, R"([protocol]
name = bbm92
n = 20000
loss = 0 dB
[source]
intrinsic_qber = 0
[detector]
efficiency = 1
dark_a_cps = 0
dark_c_cps = 0
jitter_ns = 0
[coincidence]
window = 0 ns
)");
    const auto out = d.path / "out";
    CHECK(run({"protocol-mc", "--config", cfg.string(), "--out", out.string(), "--dump-keys"}).code == exit_ok);
    const auto report = rows(out / "run_report.csv");
    REQUIRE(report.size() == 1);
    CHECK(std::stod(report[0][10]) == 0.0);
    CHECK(slurp(out / "sifted_key_a.txt") == slurp(out / "sifted_key_b.txt"));
}

TEST_CASE("relay demo") {
    TempDir d;
    const auto r = run({"relay-demo", "--config", (presets / "relay_demo.cfg").string(), "--out", d.path.string()});
    CHECK(r.code == exit_ok);
    const std::string t = slurp(d.path / "relay_transcript.txt");
    CHECK(t.find("station B recovers K_A: exact match") != std::string::npos);
    CHECK(t.find("MISMATCH") == std::string::npos);

    const auto cfg = write_cfg(d, "[relay]\nstation_a_key_bits = 1000\nstation_b_key_bits = 1000\nrequest_bits = 1200\n");
    const auto out = d.path / "depleted";
    const auto dep = run({"relay-demo", "--config", cfg.string(), "--out", out.string()});
    CHECK(dep.code == exit_check_failed);
    CHECK(dep.err.find("station 'A'") != std::string::npos);
}

TEST_CASE("usage and configuration errors exit with code 2") {
    TempDir d;
    const auto out = (d.path / "out").string();
    CHECK(run({"qber-sweep", "--out", out}).code == exit_usage);
    CHECK(run({"frobnicate"}).code == exit_usage);
    CHECK(run({"--help"}).code == exit_ok);

    const auto bad_name = write_cfg(d, "[protocol]\nname = e91\n[detector]\n[coincidence]\n[source]\n");
    auto r = run({"protocol-mc", "--config", bad_name.string(), "--out", out});
    CHECK(r.code == exit_usage);
    CHECK(r.err.find("protocol.name") != std::string::npos);

    const auto missing = write_cfg(d, "[source]\n[detector]\n[coincidence]\n");
    r = run({"qber-sweep", "--config", missing.string(), "--out", out});
    CHECK(r.code == exit_usage);
    CHECK(r.err.find("sweep") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    const auto inverted = write_cfg(d, "[orbit]\n[link]\n[source]\n[detector]\n[coincidence]\n[overhead]\n"
                                       "[pass]\nmax_elevation = 5 deg\nmin_elevation = 10 deg\n");
    r = run({"pass-sim", "--config", inverted.string(), "--out", out});
    CHECK(r.code == exit_usage);
    CHECK(r.err.find("pass.max_elevation") != std::string::npos);

    const auto blocker = d.path / "file";
    std::ofstream(blocker) << "x";
    CHECK(run({"table1", "--out", (blocker / "sub").string()}).code == exit_usage);
}

TEST_CASE("runs are byte-for-byte reproducible and replayable from the echo") {
    TempDir d;
    const auto a = d.path / "a";
    const auto b = d.path / "b";
    const auto c = d.path / "c";
    const auto cfg = (presets / "fig6.cfg").string();
    REQUIRE(run({"keyrate-sweep", "--config", cfg, "--out", a.string()}).code == exit_ok);
    REQUIRE(run({"keyrate-sweep", "--config", cfg, "--out", b.string()}).code == exit_ok);
    CHECK(slurp(a / "keyrate_sweep.csv") == slurp(b / "keyrate_sweep.csv"));
    REQUIRE(run({"keyrate-sweep", "--config", (a / "config_resolved.cfg").string(), "--out", c.string()}).code ==
            exit_ok);
    CHECK(slurp(a / "keyrate_sweep.csv") == slurp(c / "keyrate_sweep.csv"));

    const auto s = d.path / "seeded";
    REQUIRE(run({"keyrate-sweep", "--config", cfg, "--out", s.string(), "--seed", "99"}).code == exit_ok);
    CHECK(slurp(s / "keyrate_sweep.csv").find("# seed 99\n") != std::string::npos);
}
