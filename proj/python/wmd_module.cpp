#include "wmd/circuit.hpp"
#include "wmd/error.hpp"
#include "wmd/motor_fit.hpp"
#include "wmd/network_io.hpp"
#include "wmd/pfm.hpp"
#include "wmd/phasor.hpp"
#include "wmd/quantity.hpp"
#include "wmd/report.hpp"
#include "wmd/scenarios.hpp"
#include "wmd/transient.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace wmd;

namespace {

// Networks cross the boundary as JSON text in the on-disk format.
NetworkDescription network_arg(const std::optional<std::string>& text) {
    if (!text) {
        return table1_preset();
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(*text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("network JSON: ") + e.what());
    }
    return network_from_json(doc);
}

Dimension parse_dimension(const std::string& name) {
    static const std::pair<const char*, Dimension> table[] = {
        {"inductance", Dimension::inductance}, {"capacitance", Dimension::capacitance},
        {"frequency", Dimension::frequency},   {"resistance", Dimension::resistance},
        {"voltage", Dimension::voltage},       {"current", Dimension::current},
        {"time", Dimension::time},             {"torque", Dimension::torque},
        {"dimensionless", Dimension::dimensionless},
    };
    for (const auto& [key, dim] : table) {
        if (name == key) {
            return dim;
        }
    }
    throw ConfigError("unknown dimension '" + name + "'");
}

py::dict solution_dict(const PhasorSolution& s) {
    py::dict d;
    d["frequency"] = s.frequency;
    d["drive_rms"] = s.drive_rms;
    d["input_impedance"] = s.input_impedance;
    d["phase_deg"] = s.phase_deg();
    d["i_t"] = s.i_t;
    d["i_12"] = s.i_12();
    d["i_rm"] = s.i_rm();
    d["i_fm"] = s.i_fm();
    d["p_in"] = s.p_in;
    d["p_out"] = s.p_out;
    d["efficiency"] = s.efficiency;
    d["limiter_engaged"] = s.limiter_engaged;
    d["drive_scale"] = s.drive_scale;
    return d;
}

py::dict scenario_dict(const ScenarioResult& r) {
    py::dict d;
    d["kind"] = to_string(r.kind);
    d["engine"] = to_string(r.engine);
    d["pre_i_t"] = r.pre_i_t;
    d["pre_i_rm"] = r.pre_i_rm;
    d["post_i_t"] = r.post_i_t;
    d["post_i_rm"] = r.post_i_rm;
    d["unclamped_i_t"] = r.unclamped_i_t;
    d["limiter_engaged"] = r.limiter_engaged;
    d["verdict"] = to_string(r.verdict);
    d["expected"] = to_string(expected_verdict(r.kind));
    return d;
}

py::dict steady_state_dict(const SteadyStateReport& r) {
    py::dict d;
    d["converged"] = r.converged;
    d["pattern_periods"] = r.pattern_periods;
    d["simulated_time"] = r.simulated_time;
    d["rms_i_t"] = r.rms_i_t;
    d["rms_i_rm"] = r.rms_i_rm;
    d["mean_u_m"] = r.mean_u_m;
    d["mean_i_m"] = r.mean_i_m;
    d["speed_rpm"] = r.speed_rpm;
    d["p_in"] = r.p_in;
    d["p_out"] = r.p_out;
    d["efficiency"] = r.efficiency;
    d["mean_bus_current"] = r.mean_bus_current;
    d["i_t_fundamental"] = r.i_t_fundamental;
    d["audit_worst_overall"] = r.audit_worst_overall;
    return d;
}

}  // namespace

PYBIND11_MODULE(_wmd, m) {
    m.doc() = "Wireless motor drive network simulator";
    m.attr("__version__") = kVersion;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    m.def("table1_preset", [] { return network_to_json(table1_preset()).dump(2); },
          "Prototype network as JSON text.");
    m.def("validate_network", [](const std::string& text) {
        const NetworkDiagnostics diag = validate_network(network_arg(text));
        py::dict d;
        d["max_detuning"] = diag.max_detuning();
        d["coupling_violations"] = diag.coupling_violations.size();
        return d;
    });

    m.def("design_series_cap", &design_series_cap, py::arg("inductance"), py::arg("frequency"));
    m.def(
        "design_lcc",
        [](double l, double f, double rho, double r_f) {
            const LccCompensation c = design_lcc(l, f, rho, r_f);
            py::dict d;
            d["L_fm"] = c.filter_inductance;
            d["C_fm"] = c.filter_capacitance;
            d["C_rm"] = c.series_capacitance;
            d["R_fm"] = c.filter_resistance;
            return d;
        },
        py::arg("inductance"), py::arg("frequency"), py::arg("rho") = 0.5, py::arg("filter_resistance") = 0.0);
    m.def("equivalent_ac_load", py::overload_cast<double>(&equivalent_ac_load), py::arg("dc_resistance"));

    m.def(
        "solve",
        [](std::optional<std::string> network, std::optional<double> frequency, std::optional<double> drive_rms,
           std::optional<double> r_l, bool reduced, bool limiter) {
            const NetworkDescription net = network_arg(network);
            OperatingPoint op = nominal_operating_point(net);
            if (frequency) {
                op.frequency = *frequency;
            }
            if (drive_rms) {
                op.drive_rms = *drive_rms;
            }
            if (r_l) {
                op.motor_load = LoadResistance::ohms(*r_l);
            }
            PhasorSolution s = reduced ? solve_reduced(net, op) : solve_full(net, op);
            if (limiter) {
                s = apply_dc_limiter(std::move(s), net.source);
            }
            return solution_dict(s);
        },
        py::arg("network") = py::none(), py::arg("frequency") = py::none(), py::arg("drive_rms") = py::none(),
        py::arg("r_l") = py::none(), py::arg("reduced") = false, py::arg("limiter") = false,
        "Phasor solve; R_L is the DC-side motor load in ohm (inf for open).");

    m.def(
        "run_fault",
        [](const std::string& kind, const std::string& engine, std::optional<std::string> network) {
            const NetworkDescription net = network_arg(network);
            const FaultKind k = parse_fault_kind(kind);
            const Engine e = parse_engine(engine);
            ScenarioResult r;
            {
                py::gil_scoped_release release;
                r = run_fault(net, k, e);
            }
            return scenario_dict(r);
        },
        py::arg("kind"), py::arg("engine") = "phasor", py::arg("network") = py::none());
    m.def("fault_kinds", [] {
        std::vector<std::string> names;
        for (const FaultKind k : all_fault_kinds()) {
            names.push_back(to_string(k));
        }
        return names;
    });

    m.def(
        "efficiency_vs_power",
        [](const std::vector<double>& r_l, std::optional<std::string> network) {
            const auto curve = efficiency_vs_power(network_arg(network), r_l, 1);
            py::list out;
            for (const auto& p : curve) {
                out.append(py::make_tuple(p.r_l, p.output_power, p.efficiency, p.limiter_engaged));
            }
            return out;
        },
        py::arg("r_l"), py::arg("network") = py::none(), "List of (R_L, P_out, efficiency, limited).");

    m.def("harmonic_rms", &harmonic_rms, py::arg("amplitude"), py::arg("duty"), py::arg("order") = 1);
    m.def(
        "pattern_from_duty",
        [](double duty, std::size_t max_den) {
            const PfmPattern p = pattern_from_duty(duty, max_den);
            return py::make_tuple(p.n1, p.n2);
        },
        py::arg("duty"), py::arg("max_denominator") = 16);
    m.def(
        "spectrum",
        [](std::size_t n1, std::size_t n2, double amplitude, const std::vector<double>& freqs, double f) {
            const auto lines = spectrum(synthesize(make_pattern(n1, n2, f), amplitude), freqs);
            std::vector<double> rms;
            for (const auto& l : lines) {
                rms.push_back(l.rms);
            }
            return rms;
        },
        py::arg("n1"), py::arg("n2"), py::arg("amplitude"), py::arg("frequencies"), py::arg("base_frequency") = 85e3,
        "RMS content of the PFM train at each frequency.");

    m.def(
        "run_transient",
        [](const std::string& load, double duty, std::size_t max_periods, unsigned steps_per_period) {
            const NetworkDescription net = table1_preset();
            const MotorParams motor = table1_motor_fit().with_load(parse_load_case(load));
            SimConfig cfg;
            cfg.max_pattern_periods = max_periods;
            cfg.steps_per_period = steps_per_period;
            SteadyStateReport r;
            {
                py::gil_scoped_release release;
                r = run_to_steady_state(net, motor, pattern_from_duty(duty, 16, net.nominal_frequency), net.source,
                                        cfg);
            }
            return steady_state_dict(r);
        },
        py::arg("load") = "rated", py::arg("duty") = 1.0, py::arg("max_periods") = 200000,
        py::arg("steps_per_period") = 400, "Fitted prototype motor from rest to steady state.");

    m.def(
        "parse_quantity",
        [](const std::string& text, const std::string& dimension) {
            return parse_quantity(text, parse_dimension(dimension));
        },
        py::arg("text"), py::arg("dimension"));
}
