#include "satqkd/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "satqkd/config.hpp"
#include "satqkd/errors.hpp"
#include "satqkd/protocol_sim.hpp"
#include "satqkd/rng.hpp"
#include "satqkd/trusted_node.hpp"

namespace satqkd {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool dump_keys = false;
};

/// Raised for I/O problems in the output directory.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Outputs {
public:
    Outputs(fs::path dir, const ScenarioConfig& cfg) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) {
            throw OutputError(fmt::format("cannot create output directory '{}'", dir_.string()));
        }
        const std::string echo = config_echo(cfg);
        header_ = fmt::format("# satqkd {}\n# config_hash {:016x}\n# seed {}\n", SATQKD_VERSION, fnv1a64(echo), cfg.seed);
        write("config_resolved.cfg", echo);
    }

    void write(const std::string& name, const std::string& body) const {
        const fs::path path = dir_ / name;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw OutputError(fmt::format("cannot write '{}'", path.string()));
        }
        f << header_ << body;
        f.flush();
        if (!f) {
            throw OutputError(fmt::format("write to '{}' failed", path.string()));
        }
    }

    fs::path path(const std::string& name) const { return dir_ / name; }

private:
    fs::path dir_;
    std::string header_;
};

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int cmd_table1(const ScenarioConfig& cfg, const Outputs& outputs, std::ostream& out) {
    const auto rows = table1_scenarios(cfg.table1);
    std::string csv = "name,range_km,model_total_db,reference_db,delta_db\n";
    double worst = 0.0;
    for (const auto& r : rows) {
        const double model = total_link_loss(r.scenario).total_db.value;
        const double delta = model - r.reference_db.value;
        worst = std::max(worst, std::abs(delta));
        csv += fmt::format("{},{},{:.3f},{},{:.3f}\n", r.name, r.scenario.range_m / 1e3, model, r.reference_db.value,
                           delta);
    }
    outputs.write("table1.csv", csv);
    const bool ok = worst <= 3.0;
    out << fmt::format("table1: {} links, worst |delta| {:.3f} dB ({})\n", rows.size(), worst,
                       ok ? "within 3 dB" : "OUT OF TOLERANCE");
    return ok ? exit_ok : exit_check_failed;
}

void require_losses(const ScenarioConfig& cfg) {
    if (cfg.sweep.losses_db.empty()) {
        throw ConfigError("sweep.loss: empty loss grid (set sweep.loss or sweep.loss_range)", "sweep.loss");
    }
}

int cmd_qber_sweep(const ScenarioConfig& cfg, const Outputs& outputs, std::ostream& out) {
    require_losses(cfg);
    if (cfg.sweep.temperatures_k.empty()) {
        throw ConfigError("sweep.temperatures: no temperatures given", "sweep.temperatures");
    }
    const auto points = qber_vs_loss_sweep(cfg.system, cfg.sweep.temperatures_k, cfg.sweep.losses_db);
    std::string csv = "temperature_K,loss_db,singles_a_cps,singles_b_cps,true_cps,accidental_cps,qber\n";
    for (const auto& p : points) {
        csv += fmt::format("{},{},{},{},{},{},{}\n", p.temperature_k, p.link_loss_db.value, p.singles_a_cps,
                           p.singles_b_cps, p.true_coincidences_cps, p.accidental_coincidences_cps, p.qber);
    }
    outputs.write("qber_sweep.csv", csv);

    std::string summary = fmt::format("rows: {}\ntemperatures: {}\nloss points: {}\nlink loss share on arm A: {}\n",
                                      points.size(), cfg.sweep.temperatures_k.size(), cfg.sweep.losses_db.size(),
                                      cfg.system.link_loss_share_a);
    if (cfg.sweep.qber_threshold) {
        const double thr = *cfg.sweep.qber_threshold;
        summary += fmt::format("qber threshold: {}\n", thr);
        std::vector<double> ts;
        std::vector<double> ls;
        for (double t : cfg.sweep.temperatures_k) {
            try {
                const auto tol = max_tolerable_loss(cfg.system, t, thr);
                if (tol.capped) {
                    summary += fmt::format("L*({} K): no crossing below {} dB\n", t, tol.loss.value);
                } else {
                    summary += fmt::format("L*({} K): {:.4f} dB\n", t, tol.loss.value);
                    ts.push_back(t);
                    ls.push_back(tol.loss.value);
                }
            } catch (const InfeasibleError&) {
                summary += fmt::format("L*({} K): infeasible, qber at 0 dB already at or above threshold\n", t);
            }
        }
        if (ts.size() >= 2) {
            summary += fmt::format("dL*/dT (least squares): {:.4f} dB/K\n", slope(ts, ls));
        }
    }
    outputs.write("summary.txt", summary);
    out << fmt::format("qber-sweep: {} rows\n", points.size());
    return exit_ok;
}

int cmd_keyrate_sweep(const ScenarioConfig& cfg, const Outputs& outputs, std::ostream& out) {
    require_losses(cfg);
    std::string csv = "loss_db,qber,sifted_bps,key_fraction,secure_bps,classical_bps,feasible\n";
    double best = 0.0;
    std::optional<double> last_feasible;
    for (double loss : cfg.sweep.losses_db) {
        const auto r = secure_key_rate(evaluate(cfg.system, Decibels{loss}), cfg.overhead);
        csv += fmt::format("{},{},{},{},{},{},{}\n", loss, r.qber, r.sifted_rate_bps, r.key_fraction, r.secure_rate_bps,
                           r.classical_overhead_bps, fmt_bool(r.feasible));
        best = std::max(best, r.secure_rate_bps);
        if (r.feasible) {
            last_feasible = loss;
        }
    }
    outputs.write("keyrate_sweep.csv", csv);
    std::string summary = fmt::format("temperature: {} K\nloss points: {}\npeak secure rate: {:.1f} bps\n",
                                      cfg.system.det_a.temperature_k, cfg.sweep.losses_db.size(), best);
    summary += last_feasible ? fmt::format("largest feasible loss on grid: {} dB\n", *last_feasible)
                             : std::string("largest feasible loss on grid: none\n");
    outputs.write("summary.txt", summary);
    out << fmt::format("keyrate-sweep: {} rows, peak {:.1f} bps\n", cfg.sweep.losses_db.size(), best);
    return exit_ok;
}

int cmd_pass_sim(const ScenarioConfig& cfg, const Outputs& outputs, std::ostream& out) {
    PassProfile profile;
    try {
        profile = pass_profile(cfg.orbit, cfg.pass.max_elevation_deg, cfg.pass.min_elevation_deg, cfg.pass.timestep_s);
    } catch (const std::exception& e) {
        throw ConfigError(fmt::format("pass: {}", e.what()), "pass");
    }
    const PassYield y = pass_key_yield(profile, cfg.link, cfg.system, cfg.overhead);

    std::string csv = "t_s,elevation_deg,slant_range_m,link_loss_db,qber,sifted_bps,secure_bps,classical_bps,"
                      "secure_bits,feasible\n";
    std::size_t feasible = 0;
    for (const auto& s : y.samples) {
        csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", s.geometry.t_s, s.geometry.elevation_deg,
                           s.geometry.slant_range_m, s.link_loss_db.value, s.rate.qber, s.rate.sifted_rate_bps,
                           s.rate.secure_rate_bps, s.rate.classical_overhead_bps, s.secure_bits,
                           fmt_bool(s.rate.feasible));
        feasible += s.rate.feasible ? 1 : 0;
    }
    outputs.write("pass_timeseries.csv", csv);

    std::string summary;
    summary += fmt::format("altitude: {} km\n", cfg.orbit.altitude_m / 1e3);
    summary += fmt::format("max elevation: {} deg\nmin elevation: {} deg\n", profile.max_elevation_deg,
                           profile.min_elevation_deg);
    summary += fmt::format("pass duration: {:.2f} s\nsamples: {}\nfeasible samples: {}\n", profile.duration_s,
                           y.samples.size(), feasible);
    summary += fmt::format("total secure bits: {:.0f}\n", y.total_secure_bits);
    summary += fmt::format("classical bits (steady state): {:.0f}\n", y.steady_state_classical_bits);
    summary += fmt::format("classical peak rate (steady state): {:.0f} bps\n", y.steady_state_peak_bps);
    summary += fmt::format("classical bits (store and forward): {:.0f}\n", y.store_and_forward_classical_bits);
    outputs.write("pass_summary.txt", summary);
    out << fmt::format("pass-sim: {} samples, {:.0f} secure bits\n", y.samples.size(), y.total_secure_bits);
    return exit_ok;
}

double z_score(double observed, double expected, double se) {
    if (se > 0.0) {
        return (observed - expected) / se;
    }
    return observed == expected ? 0.0 : INFINITY;
}

std::string format_key(const SiftedKey& key) {
    std::string s;
    s.reserve(key.size() + key.size() / 64 + 1);
    for (std::size_t i = 0; i < key.size(); ++i) {
        s += key.bits[i] ? '1' : '0';
        if (i % 64 == 63) {
            s += '\n';
        }
    }
    if (key.size() % 64 != 0) {
        s += '\n';
    }
    return s;
}

int cmd_protocol_mc(const ScenarioConfig& cfg, const Options& opt, const Outputs& outputs, std::ostream& out) {
    const bool bb84 = cfg.protocol.name == "bb84";
    const Decibels loss = cfg.protocol.loss_db;

    ProtocolRun run;
    std::string summary = fmt::format("protocol: {}\nslots: {}\nloss: {} dB\nseed: {}\n", cfg.protocol.name,
                                      cfg.protocol.n, loss.value, cfg.seed);
    std::vector<std::pair<std::string, double>> checks;
    if (bb84) {
        run = simulate_bb84(cfg.protocol.n, cfg.wcp, loss, cfg.system.det_b, cfg.system.bg_b, cfg.system.window_s,
                            cfg.protocol.intrinsic_error, cfg.seed);
        const auto e = bb84_expectation(cfg.wcp, loss, cfg.system.det_b, cfg.system.bg_b, cfg.system.window_s,
                                        cfg.protocol.intrinsic_error);
        const auto& rep = run.report;
        const double n = static_cast<double>(rep.n_slots);
        const auto gain_check = [&](double mu, double expected, double pulses) {
            const auto it = rep.per_intensity_gain.find(mu);
            if (it == rep.per_intensity_gain.end() || pulses <= 0.0) {
                return;
            }
            const double z = z_score(it->second, expected, std::sqrt(expected * (1.0 - expected) / pulses));
            summary += fmt::format("gain(mu={}): measured {:.6g}, analytic {:.6g}, z {:.3f}\n", mu, it->second,
                                   expected, z);
            checks.emplace_back(fmt::format("gain(mu={})", mu), z);
        };
        gain_check(cfg.wcp.mean_photon_signal, e.gain_signal, n * cfg.wcp.signal_fraction);
        gain_check(cfg.wcp.mean_photon_decoy, e.gain_decoy, n * (1.0 - cfg.wcp.signal_fraction));
        if (rep.sifted_length > 0) {
            const double z = z_score(rep.measured_qber, e.qber,
                                     std::sqrt(e.qber * (1.0 - e.qber) / static_cast<double>(rep.sifted_length)));
            summary += fmt::format("qber: measured {:.6g}, analytic {:.6g}, z {:.3f}\n", rep.measured_qber, e.qber, z);
            checks.emplace_back("qber", z);
        }
    } else {
        run = simulate_bbm92(cfg.protocol.n, cfg.system, cfg.system.link_loss_a(loss), cfg.system.link_loss_b(loss),
                             cfg.seed);
        Bbm92System reference = cfg.system;
        reference.det_a.dead_time_s = 0.0;
        reference.det_b.dead_time_s = 0.0;
        const QberPoint a = evaluate(reference, loss);
        const auto& rep = run.report;
        const double expected_rate = a.true_coincidences_cps + a.accidental_coincidences_cps;
        const double z_rate =
            z_score(rep.coincidence_rate_cps(), expected_rate, std::sqrt(expected_rate * rep.duration_s) / rep.duration_s);
        summary += fmt::format("coincidence rate: measured {:.6g} cps, analytic {:.6g} cps, z {:.3f}\n",
                               rep.coincidence_rate_cps(), expected_rate, z_rate);
        checks.emplace_back("coincidence rate", z_rate);
        if (rep.sifted_length > 0) {
            const double z = z_score(rep.measured_qber, a.qber,
                                     std::sqrt(a.qber * (1.0 - a.qber) / static_cast<double>(rep.sifted_length)));
            summary += fmt::format("qber: measured {:.6g}, analytic {:.6g}, z {:.3f}\n", rep.measured_qber, a.qber, z);
            checks.emplace_back("qber", z);
        }
        if (cfg.system.det_a.dead_time_s > 0.0) {
            summary += "note: dead time is not simulated; analytic values use zero dead time\n";
        }
    }

    const auto& rep = run.report;
    std::ostringstream report_csv;
    write_csv(report_csv, rep);
    outputs.write("run_report.csv", report_csv.str());

    const auto [key_a, key_b] = sift(run.alice, run.bob);
    try {
        const auto est = estimate_qber(key_a, key_b, cfg.protocol.sample_fraction, cfg.seed);
        summary += fmt::format("sampled qber estimate: {:.6g} from {} bits, {} bits remain\n", est.estimate,
                               est.sample_size, est.remaining_a.size());
    } catch (const EstimationError&) {
        summary += "sampled qber estimate: not possible, sample would be empty\n";
    }

    bool agree = true;
    for (const auto& [name, z] : checks) {
        agree = agree && std::abs(z) <= 3.0;
    }
    summary += fmt::format("agreement within 3 sigma: {}\n", agree ? "yes" : "no");
    outputs.write("mc_summary.txt", summary);

    if (opt.dump_keys) {
        outputs.write("sifted_key_a.txt", format_key(key_a));
        outputs.write("sifted_key_b.txt", format_key(key_b));
    }
    out << fmt::format("protocol-mc: {} sifted bits, qber {:.6g}, agreement {}\n", rep.sifted_length,
                       rep.measured_qber, agree ? "yes" : "no");
    return agree ? exit_ok : exit_check_failed;
}

struct StationKey {
    BitString satellite;
    BitString ground;
};

/// Noiseless BBM92 passes between the satellite (arm A) and one station
/// (arm B) until `bits` sifted bits exist.
StationKey generate_station_key(std::uint64_t bits, Decibels link_loss, CounterRng& seeds) {
    Bbm92System sys;
    sys.source.intrinsic_qber = 0.0;
    for (DetectorParams* d : {&sys.det_a, &sys.det_b}) {
        d->efficiency = 1.0;
        d->dark_fit_a_cps = 0.0;
        d->dark_fit_c_cps = 0.0;
        d->jitter_rms_s = 0.0;
        d->dead_time_s = 0.0;
    }
    sys.window_s = 0.0;
    sys.link_loss_share_a = 0.0;
    const double eta = db_to_transmittance(link_loss).eta;

    StationKey key;
    while (key.satellite.size() < bits) {
        const double missing = static_cast<double>(bits - key.satellite.size());
        const auto pairs = static_cast<std::uint64_t>(std::min(2.2 * missing / eta + 64.0, 2e7));
        const auto run = simulate_bbm92(pairs, sys, Decibels{0.0}, link_loss, seeds());
        const auto [ka, kb] = sift(run.alice, run.bob);
        key.satellite.insert(key.satellite.end(), ka.bits.begin(), ka.bits.end());
        key.ground.insert(key.ground.end(), kb.bits.begin(), kb.bits.end());
    }
    key.satellite.resize(bits);
    key.ground.resize(bits);
    return key;
}

std::string bit_prefix(const BitString& bits, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < std::min(n, bits.size()); ++i) {
        s += bits[i] ? '1' : '0';
    }
    return s;
}

int cmd_relay_demo(const ScenarioConfig& cfg, const Outputs& outputs, std::ostream& out, std::ostream& err) {
    const auto& r = cfg.relay;
    if (!(db_to_transmittance(r.link_loss_db).eta > 1e-6)) {
        throw ConfigError("relay.link_loss: above 60 dB the demo would not finish", "relay.link_loss");
    }
    CounterRng seeds(cfg.seed, Stream::relay);
    const StationKey a = generate_station_key(r.station_a_key_bits, r.link_loss_db, seeds);
    const StationKey b = generate_station_key(r.station_b_key_bits, r.link_loss_db, seeds);

    TrustedNodeStore store;
    store.deposit("A", a.satellite);
    store.deposit("B", b.satellite);

    std::string t;
    t += fmt::format("pass 1: station A holds {} key bits (matches satellite copy: {})\n", a.ground.size(),
                     a.ground == a.satellite ? "yes" : "no");
    t += fmt::format("pass 2: station B holds {} key bits (matches satellite copy: {})\n", b.ground.size(),
                     b.ground == b.satellite ? "yes" : "no");
    const std::uint64_t shorter = std::min(r.station_a_key_bits, r.station_b_key_bits);
    const std::uint64_t request = r.request_bits.value_or(shorter);
    if (!r.request_bits && r.station_a_key_bits != r.station_b_key_bits) {
        t += fmt::format("request: {} bits (truncated to the shorter key)\n", request);
    } else {
        t += fmt::format("request: {} bits\n", request);
    }

    ParityAnnouncement ann;
    try {
        ann = store.establish_shared("A", "B", request);
    } catch (const KeyDepletionError& e) {
        t += fmt::format("depletion: station {} holds {} bits, {} requested\n", e.station(), e.available(),
                         e.requested());
        outputs.write("relay_transcript.txt", t);
        err << "relay-demo: " << e.what() << '\n';
        return exit_check_failed;
    }

    const auto ones = static_cast<double>(std::count(ann.parity.begin(), ann.parity.end(), std::uint8_t{1}));
    const double fraction = ann.parity.empty() ? 0.0 : ones / static_cast<double>(ann.parity.size());
    t += fmt::format("parity announced: {} bits, offsets A={} B={}\n", ann.parity.size(), ann.offset_a, ann.offset_b);
    t += fmt::format("parity head: {}\n", bit_prefix(ann.parity, 64));
    t += fmt::format("parity monobit: ones fraction {:.6f}, |f - 0.5| = {:.6f}\n", fraction, std::abs(fraction - 0.5));

    const auto segment = [&](const BitString& k, std::size_t offset) {
        return BitString(k.begin() + static_cast<std::ptrdiff_t>(offset),
                         k.begin() + static_cast<std::ptrdiff_t>(offset + request));
    };
    const BitString own_a = segment(a.ground, ann.offset_a);
    const BitString own_b = segment(b.ground, ann.offset_b);
    const bool b_recovers = recover_partner_key(ann.parity, own_b) == own_a;
    const bool a_recovers = recover_partner_key(ann.parity, own_a) == own_b;
    t += fmt::format("station B recovers K_A: {}\n", b_recovers ? "exact match" : "MISMATCH");
    t += fmt::format("station A recovers K_B: {}\n", a_recovers ? "exact match" : "MISMATCH");
    t += fmt::format("shared key head: {}\n", bit_prefix(own_a, 64));
    t += fmt::format("remaining: A={} B={}\n", store.remaining("A"), store.remaining("B"));
    outputs.write("relay_transcript.txt", t);

    const bool ok = a_recovers && b_recovers;
    out << fmt::format("relay-demo: {} bits shared, recovery {}\n", request, ok ? "exact" : "FAILED");
    return ok ? exit_ok : exit_check_failed;
}

int dispatch(const std::string& command, const Options& opt, std::ostream& out, std::ostream& err) {
    ScenarioConfig cfg;
    if (!opt.config.empty()) {
        cfg = load_config(opt.config);
    } else if (command != "table1") {
        throw ConfigError("--config is required");
    }
    if (opt.seed) {
        cfg.seed = *opt.seed;
    }
    if (command == "qber-sweep") {
        cfg.require({"source", "detector", "coincidence", "sweep"});
    } else if (command == "keyrate-sweep") {
        cfg.require({"source", "detector", "coincidence", "overhead", "sweep"});
    } else if (command == "pass-sim") {
        cfg.require({"orbit", "pass", "link", "source", "detector", "coincidence", "overhead"});
    } else if (command == "protocol-mc") {
        cfg.require({"protocol", "detector", "coincidence"});
        cfg.require({cfg.protocol.name == "bb84" ? "wcp" : "source"});
    } else if (command == "relay-demo") {
        cfg.require({"relay"});
    }
    const Outputs outputs(opt.out_dir, cfg);
    if (command == "table1") {
        return cmd_table1(cfg, outputs, out);
    }
    if (command == "qber-sweep") {
        return cmd_qber_sweep(cfg, outputs, out);
    }
    if (command == "keyrate-sweep") {
        return cmd_keyrate_sweep(cfg, outputs, out);
    }
    if (command == "pass-sim") {
        return cmd_pass_sim(cfg, outputs, out);
    }
    if (command == "protocol-mc") {
        return cmd_protocol_mc(cfg, opt, outputs, out);
    }
    return cmd_relay_demo(cfg, outputs, out, err);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Satellite QKD link, detector and key-rate models", "satqkd"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(SATQKD_VERSION));

    Options opt;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"table1", "Reference attenuation table for the eight link geometries"},
        {"qber-sweep", "QBER versus loss and detector temperature"},
        {"keyrate-sweep", "Secure key rate and classical overhead versus loss"},
        {"pass-sim", "Key yield integrated over a satellite pass"},
        {"protocol-mc", "Monte Carlo BB84 or BBM92 run compared with the analytic model"},
        {"relay-demo", "Trusted-node key relay between two ground stations"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        auto* config = sub->add_option("--config", opt.config, "Scenario file");
        if (name != "table1") {
            config->required();
        }
        sub->add_option("--out", opt.out_dir, "Output directory")->required();
        sub->add_option("--seed", opt.seed, "Override [run] seed");
        if (name == "protocol-mc") {
            sub->add_flag("--dump-keys", opt.dump_keys, "Write the sifted keys");
        }
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return dispatch(command, opt, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
    } catch (const OutputError& e) {
        err << "output error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return exit_usage;
}

}  // namespace satqkd
