#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "satqkd/cli.hpp"
#include "satqkd/config.hpp"
#include "satqkd/detector.hpp"
#include "satqkd/errors.hpp"
#include "satqkd/key_rate.hpp"
#include "satqkd/link_budget.hpp"
#include "satqkd/orbit.hpp"
#include "satqkd/protocol_sim.hpp"
#include "satqkd/qber.hpp"
#include "satqkd/trusted_node.hpp"
#include "satqkd/units.hpp"

namespace py = pybind11;
using namespace satqkd;

namespace {

py::dict qber_dict(const QberPoint& p) {
    py::dict d;
    d["loss_db"] = p.link_loss_db.value;
    d["temperature_k"] = p.temperature_k;
    d["singles_a_cps"] = p.singles_a_cps;
    d["singles_b_cps"] = p.singles_b_cps;
    d["true_cps"] = p.true_coincidences_cps;
    d["accidental_cps"] = p.accidental_coincidences_cps;
    d["qber"] = p.qber;
    return d;
}

py::dict rate_dict(const KeyRateResult& r) {
    py::dict d;
    d["qber"] = r.qber;
    d["sifted_bps"] = r.sifted_rate_bps;
    d["key_fraction"] = r.key_fraction;
    d["secure_bps"] = r.secure_rate_bps;
    d["classical_bps"] = r.classical_overhead_bps;
    d["feasible"] = r.feasible;
    return d;
}

py::dict report_dict(const RunReport& r) {
    py::dict d;
    d["protocol"] = to_string(r.protocol);
    d["n_slots"] = r.n_slots;
    d["duration_s"] = r.duration_s;
    d["detections_a"] = r.detections_a;
    d["detections_b"] = r.detections_b;
    d["coincidences"] = r.coincidences;
    d["true_coincidences"] = r.true_coincidences;
    d["accidental_coincidences"] = r.accidental_coincidences;
    d["sifted_length"] = r.sifted_length;
    d["sifted_errors"] = r.sifted_errors;
    d["measured_qber"] = r.measured_qber;
    d["per_intensity_gain"] = r.per_intensity_gain;
    d["seed"] = r.seed;
    return d;
}

py::array_t<std::uint8_t> to_array(const BitString& bits) {
    py::array_t<std::uint8_t> a(static_cast<py::ssize_t>(bits.size()));
    std::copy(bits.begin(), bits.end(), a.mutable_data());
    return a;
}

BitString to_bits(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    BitString b(a.data(), a.data() + a.size());
    for (auto& x : b) {
        if (x > 1) {
            throw py::value_error("bit arrays must contain only 0 and 1");
        }
    }
    return b;
}

ScenarioConfig parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "<string>");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.attr("__version__") = SATQKD_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
    py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);
    py::register_exception<KeyDepletionError>(m, "KeyDepletionError", PyExc_RuntimeError);

    m.def("db_to_transmittance", [](double db) { return db_to_transmittance(Decibels{db}).eta; }, py::arg("loss_db"));
    m.def("transmittance_to_db", [](double eta) { return transmittance_to_db(Transmittance{eta}).value; },
          py::arg("eta"));

    m.def(
        "dark_count_rate",
        [](double temperature_k, double a, double b, double c) {
            DetectorParams d;
            d.temperature_k = temperature_k;
            d.dark_fit_a_cps = a;
            d.dark_fit_b_per_k = b;
            d.dark_fit_c_cps = c;
            return dark_count_rate(d);
        },
        py::arg("temperature_k"), py::arg("a") = 1790.0, py::arg("b") = 0.08, py::arg("c") = -81.0);
    m.def("accidental_rate", &accidental_rate, py::arg("s1_cps"), py::arg("s2_cps"), py::arg("window_s"),
          py::arg("either_first") = true);
    m.def("binary_entropy", &binary_entropy, py::arg("p"));
    m.def("secure_key_fraction", &secure_key_fraction, py::arg("qber"), py::arg("f_ec") = 1.0);

    m.def(
        "table1",
        []() {
            py::list rows;
            for (const auto& r : table1_scenarios()) {
                py::dict d;
                d["name"] = r.name;
                d["range_m"] = r.scenario.range_m;
                d["model_db"] = total_link_loss(r.scenario).total_db.value;
                d["reference_db"] = r.reference_db.value;
                rows.append(d);
            }
            return rows;
        },
        "Reference link budgets with the default calibration.");

    m.def("slant_range", [](double altitude_m, double elevation_deg) {
        return slant_range(CircularOrbit{altitude_m}, elevation_deg);
    }, py::arg("altitude_m"), py::arg("elevation_deg"));
    m.def("orbital_period", [](double altitude_m) { return orbital_period(CircularOrbit{altitude_m}); },
          py::arg("altitude_m"));
    m.def("geo_max_latitude", &geo_max_latitude);
    m.def(
        "pass_profile",
        [](double altitude_m, double max_elevation_deg, double min_elevation_deg, double timestep_s) {
            const auto p = pass_profile(CircularOrbit{altitude_m}, max_elevation_deg, min_elevation_deg, timestep_s);
            const auto n = static_cast<py::ssize_t>(p.samples.size());
            py::array_t<double> t(n), el(n), range(n);
            for (py::ssize_t i = 0; i < n; ++i) {
                t.mutable_at(i) = p.samples[i].t_s;
                el.mutable_at(i) = p.samples[i].elevation_deg;
                range.mutable_at(i) = p.samples[i].slant_range_m;
            }
            py::dict d;
            d["duration_s"] = p.duration_s;
            d["t_s"] = t;
            d["elevation_deg"] = el;
            d["slant_range_m"] = range;
            return d;
        },
        py::arg("altitude_m"), py::arg("max_elevation_deg"), py::arg("min_elevation_deg"), py::arg("timestep_s"));

    m.def("xor_relay", [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> a,
                          py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> b) {
        return to_array(xor_relay(to_bits(a), to_bits(b)));
    }, py::arg("key_a"), py::arg("key_b"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a CLI invocation in-process; returns (exit_code, stdout, stderr).");

    py::class_<ScenarioConfig>(m, "Scenario")
        .def_static("load", &load_config, py::arg("path"))
        .def_static("parse", &parse_text, py::arg("text"))
        .def_readwrite("seed", &ScenarioConfig::seed)
        .def_property_readonly("sections", [](const ScenarioConfig& c) {
            return std::vector<std::string>(c.sections.begin(), c.sections.end());
        })
        .def_property_readonly("losses_db", [](const ScenarioConfig& c) { return c.sweep.losses_db; })
        .def_property_readonly("temperatures_k", [](const ScenarioConfig& c) { return c.sweep.temperatures_k; })
        .def("echo", &config_echo)
        .def(
            "qber",
            [](const ScenarioConfig& c, double loss_db, std::optional<double> temperature_k) {
                const Bbm92System s = temperature_k ? c.system.at_temperature(*temperature_k) : c.system;
                return qber_dict(evaluate(s, Decibels{loss_db}));
            },
            py::arg("loss_db"), py::arg("temperature_k") = py::none())
        .def(
            "qber_sweep",
            [](const ScenarioConfig& c, std::optional<std::vector<double>> temperatures,
               std::optional<std::vector<double>> losses) {
                const auto ts = temperatures.value_or(c.sweep.temperatures_k);
                const auto ls = losses.value_or(c.sweep.losses_db);
                const auto points = qber_vs_loss_sweep(c.system, ts, ls);
                py::array_t<double> q({static_cast<py::ssize_t>(ts.size()), static_cast<py::ssize_t>(ls.size())});
                auto view = q.mutable_unchecked<2>();
                for (std::size_t i = 0; i < ts.size(); ++i) {
                    for (std::size_t j = 0; j < ls.size(); ++j) {
                        view(i, j) = points[i * ls.size() + j].qber;
                    }
                }
                return q;
            },
            py::arg("temperatures_k") = py::none(), py::arg("losses_db") = py::none(),
            "QBER grid with one row per temperature.")
        .def(
            "max_tolerable_loss",
            [](const ScenarioConfig& c, double temperature_k, double threshold) {
                const auto r = max_tolerable_loss(c.system, temperature_k, threshold);
                return py::make_tuple(r.loss.value, r.capped);
            },
            py::arg("temperature_k"), py::arg("threshold") = default_qber_threshold)
        .def(
            "key_rate",
            [](const ScenarioConfig& c, double loss_db) {
                return rate_dict(secure_key_rate(evaluate(c.system, Decibels{loss_db}), c.overhead));
            },
            py::arg("loss_db"))
        .def("pass_yield",
             [](const ScenarioConfig& c) {
                 const auto profile =
                     pass_profile(c.orbit, c.pass.max_elevation_deg, c.pass.min_elevation_deg, c.pass.timestep_s);
                 const auto y = pass_key_yield(profile, c.link, c.system, c.overhead);
                 py::dict d;
                 d["duration_s"] = profile.duration_s;
                 d["samples"] = y.samples.size();
                 d["total_secure_bits"] = y.total_secure_bits;
                 d["steady_state_classical_bits"] = y.steady_state_classical_bits;
                 d["store_and_forward_classical_bits"] = y.store_and_forward_classical_bits;
                 return d;
             })
        .def(
            "simulate",
            [](const ScenarioConfig& c, std::optional<std::uint64_t> n, std::optional<std::uint64_t> seed) {
                const std::uint64_t slots = n.value_or(c.protocol.n);
                const std::uint64_t s = seed.value_or(c.seed);
                const Decibels loss = c.protocol.loss_db;
                ProtocolRun run;
                {
                    py::gil_scoped_release release;
                    run = c.protocol.name == "bb84"
                              ? simulate_bb84(slots, c.wcp, loss, c.system.det_b, c.system.bg_b, c.system.window_s,
                                              c.protocol.intrinsic_error, s)
                              : simulate_bbm92(slots, c.system, c.system.link_loss_a(loss), c.system.link_loss_b(loss), s);
                }
                const auto [ka, kb] = sift(run.alice, run.bob);
                py::dict d = report_dict(run.report);
                d["key_a"] = to_array(ka.bits);
                d["key_b"] = to_array(kb.bits);
                return d;
            },
            py::arg("n") = py::none(), py::arg("seed") = py::none(),
            "Monte Carlo run of the configured protocol; returns the report and both sifted keys.");
}
