// wmd: command-line front end for the wireless motor drive models.

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

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace wmd;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Common {
    std::string preset = "table1";
    std::string config;
    std::string out;
    unsigned jobs = 0;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_output = true) {
    cmd->add_option("--preset", c.preset, "Built-in network (table1)")->capture_default_str();
    cmd->add_option("--config", c.config, "Network JSON file (overrides --preset)");
    if (with_output) {
        cmd->add_option("--out", c.out, "Run directory (default wmd-out/<command>)");
        cmd->add_option("--jobs", c.jobs, "Worker threads, 0 = all cores")->capture_default_str();
        cmd->add_flag("--quiet", c.quiet, "Do not print the summary");
    }
}

NetworkDescription load(const Common& c) {
    if (!c.config.empty()) {
        return load_network(c.config);
    }
    if (c.preset != "table1") {
        throw ConfigError("unknown preset '" + c.preset + "' (available: table1)");
    }
    return table1_preset();
}

std::string q(double v, const char* unit) { return format_number(v) + " " + unit; }

std::string pct(double ratio) { return fmt::format("{:.3f} %", 100.0 * ratio); }

ordered_json base_config(const NetworkDescription& net) {
    ordered_json cfg;
    cfg["network"] = network_to_json(net);
    return cfg;
}

int finish(RunReport& report, const Common& c, ordered_json cfg) {
    report.config = cfg.dump();
    const std::filesystem::path dir = c.out.empty() ? std::filesystem::path("wmd-out") / report.command
                                                          : std::filesystem::path(c.out);
    emit_report(report, dir);
    if (!c.quiet) {
        std::cout << report.summary();
        std::cout << "run directory: " << dir.string() << " (config " << report.config_hash() << ")\n";
    }
    return kExitOk;
}

std::optional<double> opt_quantity(const std::string& text, Dimension dim) {
    if (text.empty()) {
        return std::nullopt;
    }
    return parse_quantity(text, dim);
}

// --- design ------------------------------------------------------------------

struct DesignArgs {
    std::string inductance;
    std::string frequency;
    bool lcc = false;
    std::string rho = "0.5";
    std::string filter_resistance;
    std::string measured_c;
    std::string measured_c_rm;
    std::string measured_c_fm;
    std::string measured_l_fm;
};

void print_against(const char* name, double designed, const std::string& measured, Dimension dim, double unit,
                   const char* unit_name) {
    std::cout << fmt::format("{:<6} = {} {}", name, format_number(designed / unit), unit_name);
    if (!measured.empty()) {
        const double m = parse_quantity(measured, dim);
        std::cout << fmt::format("   measured {} {}, deviation {:+.3f} %", format_number(m / unit), unit_name,
                                 100.0 * (m - designed) / designed);
    }
    std::cout << '\n';
}

int cmd_design(const DesignArgs& a) {
    const double l = parse_quantity(a.inductance, Dimension::inductance);
    const double f = parse_quantity(a.frequency, Dimension::frequency);
    if (!a.lcc) {
        const double c = design_series_cap(l, f);
        print_against("C", c, a.measured_c, Dimension::capacitance, 1e-9, "nF");
        return kExitOk;
    }
    const double rho = parse_quantity(a.rho, Dimension::dimensionless);
    const double r_fm = a.filter_resistance.empty() ? 0.0 : parse_quantity(a.filter_resistance, Dimension::resistance);
    const LccCompensation lcc = design_lcc(l, f, rho, r_fm);
    print_against("L_fm", lcc.filter_inductance, a.measured_l_fm, Dimension::inductance, 1e-6, "uH");
    print_against("C_fm", lcc.filter_capacitance, a.measured_c_fm, Dimension::capacitance, 1e-9, "nF");
    print_against("C_rm", lcc.series_capacitance, a.measured_c_rm, Dimension::capacitance, 1e-9, "nF");
    std::cout << fmt::format("L_rme  = {} uH\n",
                             format_number(equivalent_coil_inductance(l, lcc.series_capacitance, f) / 1e-6));
    return kExitOk;
}

// --- solve -------------------------------------------------------------------

struct SolveArgs {
    Common common;
    std::string rl;
    std::string frequency;
    std::string drive;
    std::string duty;
    bool no_limiter = false;
    bool reduced = false;
};

void add_solution_lines(RunReport& r, const PhasorSolution& s, const std::string& tag) {
    r.lines.push_back(tag + "|Z_in|   = " + q(std::abs(s.input_impedance), "ohm"));
    r.lines.push_back(tag + "phase    = " + q(s.phase_deg(), "deg"));
    r.lines.push_back(tag + "|I_t|    = " + q(std::abs(s.i_t), "A"));
    r.lines.push_back(tag + "|I_12|   = " + q(std::abs(s.i_12()), "A"));
    r.lines.push_back(tag + "|I_rm|   = " + q(std::abs(s.i_rm()), "A"));
    r.lines.push_back(tag + "|I_fm|   = " + q(std::abs(s.i_fm()), "A"));
    r.lines.push_back(tag + "P_in     = " + q(s.p_in, "W"));
    r.lines.push_back(tag + "P_out    = " + q(s.p_out, "W"));
    r.lines.push_back(tag + "eta      = " + format_number(s.efficiency));
    r.lines.push_back(tag + "limiter  = " + std::string(s.limiter_engaged ? "engaged" : "off"));
}

int cmd_solve(const SolveArgs& a) {
    const NetworkDescription net = load(a.common);
    OperatingPoint op = nominal_operating_point(net);
    if (!a.rl.empty()) {
        op.motor_load = parse_load(a.rl);
    }
    if (auto f = opt_quantity(a.frequency, Dimension::frequency)) {
        op.frequency = *f;
    }
    if (!a.duty.empty()) {
        op.drive_rms = harmonic_rms(net.source.voltage_limit, parse_quantity(a.duty, Dimension::dimensionless), 1);
    }
    if (auto d = opt_quantity(a.drive, Dimension::voltage)) {
        op.drive_rms = *d;
    }
    PhasorSolution sol = solve_full(net, op);
    if (!a.no_limiter) {
        sol = apply_dc_limiter(sol, net.source);
    }

    RunReport r;
    r.command = "solve";
    r.lines.push_back("R_L      = " + (op.motor_load.is_open() ? std::string("open") : q(op.motor_load.value(), "ohm")));
    r.lines.push_back("f        = " + q(op.frequency, "Hz"));
    r.lines.push_back("U_in     = " + q(sol.drive_rms, "V rms"));
    add_solution_lines(r, sol, "");
    r.artifacts.push_back({"solution.csv", solution_csv(sol)});

    double idle = 0.0;
    for (std::size_t k = 0; k < sol.units.size(); ++k) {
        if (k != sol.motoring) {
            idle = std::max({idle, std::abs(sol.units[k].repeater), std::abs(sol.units[k].receiver)});
        }
    }
    const double it = std::abs(sol.i_t);
    r.checks.push_back({"idling units isolated", idle <= 1e-12 * std::max(it, 1e-300),
                        "max idling current " + q(idle, "A")});
    if (!a.no_limiter) {
        r.checks.push_back({"|I_t| within source limit", it <= net.source.current_limit * (1.0 + 1e-6),
                            q(it, "A") + " <= " + q(net.source.current_limit, "A")});
    }
    if (a.reduced) {
        PhasorSolution red = solve_reduced(net, op);
        if (!a.no_limiter) {
            red = apply_dc_limiter(red, net.source);
        }
        add_solution_lines(r, red, "reduced ");
        r.artifacts.push_back({"solution_reduced.csv", solution_csv(red)});
        const double dev = std::abs(std::abs(red.i_t) - it) / it;
        r.checks.push_back({"reduced solver |I_t| within 0.5 %", dev < 0.005, pct(dev)});
    }

    ordered_json cfg = base_config(net);
    cfg["motor_load"] = op.motor_load.is_open() ? std::string("open") : format_number(op.motor_load.value());
    cfg["frequency"] = format_number(op.frequency);
    cfg["drive_rms"] = format_number(op.drive_rms);
    cfg["limiter"] = !a.no_limiter;
    cfg["reduced"] = a.reduced;
    return finish(r, a.common, cfg);
}

// --- sweep -------------------------------------------------------------------

struct SweepArgs {
    Common common;
    std::string freq;
    std::string rle;
    std::string rl;
    std::string frequency;
    std::string variants = "compensation";
    std::string scales = "0.8,1,1.2";
};

int cmd_sweep(const SweepArgs& a) {
    const NetworkDescription net = load(a.common);
    if (a.freq.empty() == a.rle.empty()) {
        throw ConfigError("sweep needs exactly one of --freq or --rle");
    }
    const double drive = square_wave_fundamental_rms(net.source.voltage_limit);
    RunReport r;
    r.command = "sweep";
    ordered_json cfg = base_config(net);
    cfg["drive_rms"] = format_number(drive);

    if (!a.freq.empty()) {
        const GridSpec g = parse_grid(a.freq, Dimension::frequency);
        const LoadResistance load_r = a.rl.empty() ? net.motoring_unit().motor.dc_resistance : parse_load(a.rl);
        const auto rows = input_impedance_sweep(net, load_r, g.lo, g.hi, g.count, drive, a.common.jobs);
        r.artifacts.push_back({"sweep.csv", impedance_sweep_csv(rows)});
        r.lines.push_back(fmt::format("{} frequency points from {} to {}", rows.size(), q(g.lo, "Hz"), q(g.hi, "Hz")));
        std::size_t failed = 0;
        for (const auto& row : rows) {
            failed += row.solution ? 0 : 1;
        }
        if (const auto zc = phase_zero_crossing_near(rows, net.nominal_frequency)) {
            r.lines.push_back("phase zero crossing nearest f: " + q(*zc, "Hz"));
        } else {
            r.lines.push_back("phase zero crossing: none in range");
        }
        r.checks.push_back({"every frequency point solved", failed == 0, fmt::format("{} failures", failed)});
        cfg["mode"] = "frequency";
        cfg["grid"] = {format_number(g.lo), format_number(g.hi), g.count};
        cfg["motor_load"] = load_r.is_open() ? std::string("open") : format_number(load_r.value());
    } else {
        const GridSpec g = parse_grid(a.rle, Dimension::resistance);
        const double f = a.frequency.empty() ? net.nominal_frequency : parse_quantity(a.frequency, Dimension::frequency);
        std::vector<NetworkVariant> variants;
        if (a.variants == "compensation") {
            variants = compensation_variants(net);
        } else if (a.variants == "coupling") {
            const std::vector<double> s = parse_list(a.scales, Dimension::dimensionless);
            variants = coupling_variants(net, s);
        } else if (a.variants == "base") {
            variants = {{"base", net}};
        } else {
            throw ConfigError("unknown --variants '" + a.variants + "' (compensation, coupling, base)");
        }
        const auto curves = load_sweep(variants, f, g.values(), drive, a.common.jobs);
        r.artifacts.push_back({"load_sweep.csv", load_sweep_csv(curves)});
        for (const auto& c : curves) {
            double best = 0.0;
            for (const auto& p : c.points) {
                best = std::max(best, p.efficiency);
            }
            r.lines.push_back(fmt::format("{:<12} peak eta {}", c.name, format_number(best)));
        }
        if (a.variants == "compensation" && curves.size() == 3) {
            for (std::size_t v = 1; v < 3; ++v) {
                std::size_t worse = 0;
                for (std::size_t k = 0; k < g.count; ++k) {
                    worse += curves[0].points[k].efficiency < curves[v].points[k].efficiency ? 1 : 0;
                }
                r.checks.push_back({curves[0].name + " >= " + curves[v].name, worse == 0,
                                    fmt::format("{} of {} points below", worse, g.count)});
            }
        }
        if (a.variants == "coupling" && curves.size() >= 2) {
            bool ordered = true;
            for (std::size_t v = 1; v < curves.size(); ++v) {
                ordered = ordered && curves[v].points.front().efficiency >= curves[v - 1].points.front().efficiency;
            }
            r.checks.push_back({"larger coupling more efficient at lowest R_Le", ordered, ""});
        }
        cfg["mode"] = "load";
        cfg["grid"] = {format_number(g.lo), format_number(g.hi), g.count};
        cfg["frequency"] = format_number(f);
        cfg["variants"] = a.variants;
        cfg["scales"] = a.variants == "coupling" ? a.scales : "";
    }
    return finish(r, a.common, cfg);
}

// --- zpa ---------------------------------------------------------------------

struct ZpaArgs {
    Common common;
    std::string rl_list = "10ohm,25ohm,50ohm";
    std::string freq = "80kHz:90kHz:2001";
    std::string window = "0.5kHz";
    std::string max_phase = "2";
};

int cmd_zpa(const ZpaArgs& a) {
    const NetworkDescription net = load(a.common);
    const std::vector<double> loads = parse_list(a.rl_list, Dimension::resistance);
    const GridSpec g = parse_grid(a.freq, Dimension::frequency);
    const double window = parse_quantity(a.window, Dimension::frequency);
    const double max_phase = parse_quantity(a.max_phase, Dimension::dimensionless);
    const auto curves = zpa_analysis(net, loads, g.lo, g.hi, g.count, a.common.jobs);
    RunReport r;
    r.command = "zpa";
    r.artifacts.push_back({"zpa.csv", zpa_csv(curves)});
    for (const ZpaCurve& c : curves) {
        const std::string tag = "R_L = " + q(c.r_l, "ohm");
        if (c.zero_crossing) {
            const double off = std::abs(*c.zero_crossing - net.nominal_frequency);
            r.checks.push_back({tag + " zero crossing near f", off <= window, q(*c.zero_crossing, "Hz")});
        } else {
            r.checks.push_back({tag + " zero crossing near f", false, "no crossing in range"});
        }
        r.checks.push_back({tag + " |phase| at f below " + format_number(max_phase) + " deg",
                            std::abs(c.phase_at_nominal_deg) < max_phase, q(c.phase_at_nominal_deg, "deg")});
    }
    ordered_json cfg = base_config(net);
    cfg["loads"] = a.rl_list;
    cfg["grid"] = {format_number(g.lo), format_number(g.hi), g.count};
    cfg["window"] = format_number(window);
    cfg["max_phase"] = format_number(max_phase);
    return finish(r, a.common, cfg);
}

// --- fault -------------------------------------------------------------------

struct FaultArgs {
    Common common;
    std::string kind = "all";
    std::string engine = "phasor";
    std::string fraction = "0.10";
    std::string post_time = "20ms";
    std::string load = "rated";
    std::string duty = "1";
    std::size_t decimation = 8;
};

int cmd_fault(const FaultArgs& a) {
    const NetworkDescription net = load(a.common);
    const Engine engine = parse_engine(a.engine);
    std::vector<FaultKind> kinds;
    if (a.kind == "all") {
        kinds = all_fault_kinds();
    } else {
        kinds = {parse_fault_kind(a.kind)};
    }
    ScenarioOptions opt;
    opt.suppression_fraction = parse_quantity(a.fraction, Dimension::dimensionless);
    opt.post_fault_time = parse_quantity(a.post_time, Dimension::time);
    const double duty = parse_quantity(a.duty, Dimension::dimensionless);
    opt.pattern = pattern_from_duty(duty, 16, net.nominal_frequency);
    opt.motor = table1_motor_fit().with_load(parse_load_case(a.load));
    opt.sim.waveform_decimation = engine == Engine::transient ? a.decimation : 0;

    const std::vector<ScenarioResult> results = run_faults(net, kinds, engine, opt, a.common.jobs);

    RunReport r;
    r.command = "fault";
    r.artifacts.push_back({"faults.csv", fault_csv(results)});
    for (const ScenarioResult& s : results) {
        r.lines.push_back(fmt::format("{:<24} pre |I_t| {}  post |I_t| {}  verdict {}", to_string(s.kind),
                                      q(s.pre_i_t, "A"), q(s.post_i_t, "A"), to_string(s.verdict)));
        r.checks.push_back({to_string(s.kind) + " verdict", s.verdict == expected_verdict(s.kind),
                            to_string(s.verdict) + " (expected " + to_string(expected_verdict(s.kind)) + ")"});
        if (engine == Engine::phasor) {
            r.checks.push_back({to_string(s.kind) + " post-fault |I_t| within source limit",
                                s.post_i_t <= net.source.current_limit * (1.0 + 1e-6), q(s.post_i_t, "A")});
        } else if (!s.waveform.empty()) {
            r.artifacts.push_back({"waveform_" + to_string(s.kind) + ".csv", waveform_csv(s.waveform)});
        }
    }
    ordered_json cfg = base_config(net);
    cfg["kinds"] = a.kind;
    cfg["engine"] = to_string(engine);
    cfg["fraction"] = format_number(opt.suppression_fraction);
    if (engine == Engine::transient) {
        cfg["post_time"] = format_number(opt.post_fault_time);
        cfg["load"] = a.load;
        cfg["pattern"] = {opt.pattern.n1, opt.pattern.n2};
        cfg["decimation"] = a.decimation;
    }
    return finish(r, a.common, cfg);
}

// --- curve -------------------------------------------------------------------

struct CurveArgs {
    Common common;
    std::string grid = "5ohm:100ohm:50";
    std::string band_lo = "200W";
    std::string band_hi = "640W";
};

int cmd_curve(const CurveArgs& a) {
    const NetworkDescription net = load(a.common);
    const GridSpec g = parse_grid(a.grid, Dimension::resistance);
    const auto points = efficiency_vs_power(net, g.values(), a.common.jobs);
    RunReport r;
    r.command = "curve";
    r.artifacts.push_back({"efficiency.csv", efficiency_curve_csv(points)});

    const auto watts = [](const std::string& s) {
        if (s.size() < 2 || s.back() != 'W') {
            throw ConfigError("power literal '" + s + "' needs a W suffix");
        }
        return parse_quantity(s.substr(0, s.size() - 1) + "V", Dimension::voltage);
    };
    const double lo = watts(a.band_lo);
    const double hi = watts(a.band_hi);
    double band_min = 1.0;
    double peak = 0.0;
    double peak_power = 0.0;
    std::size_t in_band = 0;
    bool sane = true;
    for (const auto& p : points) {
        sane = sane && p.output_power >= 0.0 && p.efficiency >= 0.0 && p.efficiency <= 1.0;
        if (p.efficiency > peak) {
            peak = p.efficiency;
            peak_power = p.output_power;
        }
        if (p.output_power >= lo && p.output_power <= hi) {
            band_min = std::min(band_min, p.efficiency);
            ++in_band;
        }
    }
    r.lines.push_back(fmt::format("{} points, output {} .. {}", points.size(), q(points.front().output_power, "W"),
                                  q(points.back().output_power, "W")));
    r.lines.push_back("peak eta " + format_number(peak) + " at " + q(peak_power, "W"));
    r.checks.push_back({"power >= 0 and eta in [0, 1]", sane, ""});
    r.checks.push_back({fmt::format("eta >= 0.851 from {} to {}", q(lo, "W"), q(hi, "W")),
                        in_band > 0 && band_min >= 0.851,
                        in_band > 0 ? fmt::format("min {} over {} points", format_number(band_min), in_band)
                                    : std::string("no points in band")});
    r.checks.push_back({"peak eta in [0.88, 0.97]", peak >= 0.88 && peak <= 0.97, format_number(peak)});
    ordered_json cfg = base_config(net);
    cfg["grid"] = {format_number(g.lo), format_number(g.hi), g.count};
    cfg["band"] = {format_number(lo), format_number(hi)};
    return finish(r, a.common, cfg);
}

// --- transient ---------------------------------------------------------------

struct TransientArgs {
    Common common;
    std::string load = "rated";
    std::string duty = "1";
    std::size_t max_denominator = 16;
    unsigned steps_per_period = 400;
    std::size_t max_periods = 200000;
    std::size_t decimation = 4;
    std::string tail = "2ms";
    bool no_limiter = false;
};

int cmd_transient(const TransientArgs& a) {
    const NetworkDescription net = load(a.common);
    const LoadCase lc = parse_load_case(a.load);
    const MotorParams motor = table1_motor_fit().with_load(lc);
    const double duty = parse_quantity(a.duty, Dimension::dimensionless);
    const PfmPattern pattern = pattern_from_duty(duty, a.max_denominator, net.nominal_frequency);
    const double tail = parse_quantity(a.tail, Dimension::time);
    SimConfig sim;
    sim.steps_per_period = a.steps_per_period;
    sim.max_pattern_periods = a.max_periods;
    sim.waveform_decimation = a.decimation;
    sim.limiter_enabled = !a.no_limiter;

    const SteadyStateReport rep = run_to_steady_state(net, motor, pattern, net.source, sim);

    std::vector<WaveformSample> wave;
    for (const WaveformSample& s : rep.waveform) {
        if (s.time >= rep.simulated_time - tail - 1e-12) {
            wave.push_back(s);
        }
    }

    RunReport r;
    r.command = "transient";
    r.lines.push_back(fmt::format("load {}  pattern ({}, {})  duty {}", to_string(lc), pattern.n1, pattern.n2,
                                  format_number(pattern.duty())));
    r.lines.push_back(fmt::format("simulated {} over {} pattern periods", q(rep.simulated_time, "s"),
                                  rep.pattern_periods));
    r.lines.push_back("U_m      = " + q(rep.mean_u_m, "V"));
    r.lines.push_back("I_m      = " + q(rep.mean_i_m, "A"));
    r.lines.push_back("speed    = " + q(rep.speed_rpm, "rpm"));
    r.lines.push_back("rms i_t  = " + q(rep.rms_i_t, "A"));
    r.lines.push_back("rms i_rm = " + q(rep.rms_i_rm, "A"));
    r.lines.push_back("P_in     = " + q(rep.p_in, "W"));
    r.lines.push_back("P_out    = " + q(rep.p_out, "W"));
    r.lines.push_back("eta      = " + format_number(rep.efficiency));
    r.lines.push_back("bus      = " + q(rep.mean_bus_voltage, "V") + ", " + q(rep.mean_bus_current, "A") +
                      (rep.limiter_engaged ? " (limiter engaged)" : ""));

    r.checks.push_back({"steady state reached", rep.converged, fmt::format("{} pattern periods", rep.pattern_periods)});
    r.checks.push_back({"energy audit within 0.5 % per period", rep.audit_worst_final_window <= 0.005,
                        format_number(rep.audit_worst_final_window)});
    if (sim.limiter_enabled) {
        r.checks.push_back({"source current within limit",
                            rep.peak_period_bus_current <= net.source.current_limit * (1.0 + 1e-9),
                            q(rep.peak_period_bus_current, "A")});
    }
    const OperatingPoint op = matching_operating_point(net, rep);
    const CrossEngineDeviation dev = compare_with_phasor(rep, solve_full(net, op));
    r.lines.push_back(fmt::format("phasor cross-check: |I_t| {} vs {} ({}), |I_rm| {} vs {} ({})",
                                  q(dev.transient_i_t, "A"), q(dev.phasor_i_t, "A"), pct(dev.deviation_i_t),
                                  q(dev.transient_i_rm, "A"), q(dev.phasor_i_rm, "A"), pct(dev.deviation_i_rm)));
    r.checks.push_back({"fundamental i_t within 5 % of phasor engine", dev.deviation_i_t <= 0.05,
                        pct(dev.deviation_i_t)});

    ordered_json doc;
    doc["converged"] = rep.converged;
    doc["pattern_periods"] = rep.pattern_periods;
    doc["simulated_time_s"] = format_number(rep.simulated_time);
    doc["rms_i_t_a"] = format_number(rep.rms_i_t);
    doc["rms_i_12_a"] = format_number(rep.rms_i_12);
    doc["rms_i_rm_a"] = format_number(rep.rms_i_rm);
    doc["rms_i_fm_a"] = format_number(rep.rms_i_fm);
    doc["mean_u_m_v"] = format_number(rep.mean_u_m);
    doc["mean_i_m_a"] = format_number(rep.mean_i_m);
    doc["speed_rpm"] = format_number(rep.speed_rpm);
    doc["p_in_w"] = format_number(rep.p_in);
    doc["p_out_w"] = format_number(rep.p_out);
    doc["efficiency"] = format_number(rep.efficiency);
    doc["mean_bus_current_a"] = format_number(rep.mean_bus_current);
    doc["mean_bus_voltage_v"] = format_number(rep.mean_bus_voltage);
    doc["limiter_engaged"] = rep.limiter_engaged;
    doc["fundamental_i_t_a"] = format_number(std::abs(rep.i_t_fundamental));
    doc["fundamental_i_rm_a"] = format_number(std::abs(rep.i_rm_fundamental));
    doc["phasor_i_t_a"] = format_number(dev.phasor_i_t);
    doc["phasor_deviation_i_t"] = format_number(dev.deviation_i_t);
    doc["audit_worst_final_window"] = format_number(rep.audit_worst_final_window);
    doc["audit_worst_overall"] = format_number(rep.audit_worst_overall);
    r.artifacts.push_back({"report.json", doc.dump(2) + '\n'});
    r.artifacts.push_back({"waveform.csv", waveform_csv(wave)});

    ordered_json cfg = base_config(net);
    cfg["load"] = to_string(lc);
    cfg["motor"] = {format_number(motor.armature_resistance), format_number(motor.armature_inductance),
                    format_number(motor.back_emf_constant), format_number(motor.inertia),
                    format_number(motor.viscous_friction), format_number(motor.load_torque)};
    cfg["pattern"] = {pattern.n1, pattern.n2};
    cfg["steps_per_period"] = sim.steps_per_period;
    cfg["max_periods"] = sim.max_pattern_periods;
    cfg["decimation"] = sim.waveform_decimation;
    cfg["tail"] = format_number(tail);
    cfg["limiter"] = sim.limiter_enabled;
    return finish(r, a.common, cfg);
}

// --- pfm ---------------------------------------------------------------------

struct PfmArgs {
    Common common;
    std::string duty;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::size_t max_denominator = 16;
    std::string amplitude;
    std::string frequency;
    unsigned order = 1;
    std::size_t harmonics = 200;
};

int cmd_pfm(const PfmArgs& a) {
    const NetworkDescription net = load(a.common);
    const double f = a.frequency.empty() ? net.nominal_frequency : parse_quantity(a.frequency, Dimension::frequency);
    const double e = a.amplitude.empty() ? net.source.voltage_limit : parse_quantity(a.amplitude, Dimension::voltage);
    PfmPattern pattern;
    if (!a.duty.empty()) {
        if (a.n1 + a.n2 > 0) {
            throw ConfigError("give either --duty or --n1/--n2");
        }
        pattern = pattern_from_duty(parse_quantity(a.duty, Dimension::dimensionless), a.max_denominator, f);
        pattern.order = a.order;
    } else {
        pattern = make_pattern(a.n1 + a.n2 == 0 ? 1 : a.n1, a.n2, f, a.order);
    }
    pattern = make_pattern(pattern.n1, pattern.n2, f, a.order);
    const SquareWaveSegmentTrain train = synthesize(pattern, e);
    const auto lines = pattern_harmonics(train, a.harmonics);
    double power = 0.0;
    for (const auto& l : lines) {
        power += l.rms * l.rms;
    }
    const EstimateCheck est = check_estimate(pattern, e);

    RunReport r;
    r.command = "pfm";
    r.artifacts.push_back({"segments.csv", segments_csv(train)});
    r.artifacts.push_back({"spectrum.csv", spectrum_csv(lines)});
    r.lines.push_back(fmt::format("pattern ({}, {}) order {}  duty {}  period {}", pattern.n1, pattern.n2,
                                  pattern.order, format_number(pattern.duty()), q(pattern.period(), "s")));
    r.lines.push_back("content at f: analytic " + q(est.analytic, "V") + ", exact " + q(est.exact, "V"));
    r.lines.push_back(fmt::format("power in {} pattern harmonics: {} of E^2", a.harmonics,
                                  format_number(power / (e * e))));
    r.checks.push_back({"analytic estimate within 5 % of exact spectrum", !est.demoted, pct(est.relative_gap)});
    ordered_json cfg = base_config(net);
    cfg["pattern"] = {pattern.n1, pattern.n2, pattern.order};
    cfg["frequency"] = format_number(f);
    cfg["amplitude"] = format_number(e);
    cfg["harmonics"] = a.harmonics;
    return finish(r, a.common, cfg);
}

// --- validate / export / fit-motor -------------------------------------------

int cmd_validate(const Common& c) {
    const NetworkDescription net = load(c);
    check_invariants(net);
    const NetworkDiagnostics diag = validate_network(net);
    for (const TankDetuning& t : diag.tanks) {
        std::cout << fmt::format("{:<10} resonates at {} (detuning {})\n", t.tank, q(t.resonant_frequency, "Hz"),
                                 pct(t.relative_detuning));
    }
    for (const CouplingViolation& v : diag.coupling_violations) {
        std::cout << fmt::format("coupling {} has k = {} > 1\n", v.link, format_number(v.coupling_coefficient));
    }
    if (!diag.coupling_violations.empty()) {
        std::cout << "invalid network\n";
        return kExitUsage;
    }
    std::cout << "network valid\n";
    return kExitOk;
}

int cmd_export(const Common& c, const std::string& path) {
    const NetworkDescription net = load(c);
    if (path.empty()) {
        std::cout << network_to_json(net).dump(2) << '\n';
    } else {
        save_network(net, path);
    }
    return kExitOk;
}

int cmd_fit_motor(const Common& c, bool refine) {
    const NetworkDescription net = load(c);
    MotorFit fit = fit_motor(net);
    if (c.config.empty()) {
        fit.medium_torque = kTable1MediumTorque;
    }
    std::cout << fmt::format("R_a = {} ohm\nL_a = {} H\nJ   = {} kg m^2\n", format_number(fit.base.armature_resistance),
                             format_number(fit.base.armature_inductance), format_number(fit.base.inertia));
    std::cout << fmt::format("k_e = {} V s/rad\nB   = {} N m s/rad\n", format_number(fit.base.back_emf_constant),
                             format_number(fit.base.viscous_friction));
    std::cout << fmt::format("T_L rated  = {} N m\nT_L medium = {} N m (quasi-static {} N m)\n",
                             format_number(fit.rated_torque), format_number(fit.medium_torque),
                             format_number(fit.medium_torque_quasi_static));
    std::cout << "quasi-static residuals:\n";
    for (const FitResidual& res : fit.residuals) {
        std::cout << fmt::format("  {:<20} target {}  predicted {}  ({:+.2f} %)\n", res.name,
                                 format_number(res.target), format_number(res.predicted), 100.0 * res.relative());
    }
    if (refine) {
        const TorqueRefinement tr = refine_medium_torque(net, fit);
        for (const auto& [torque, speed] : tr.trace) {
            std::cout << fmt::format("  transient T_L {} N m -> {} rpm\n", format_number(torque),
                                     format_number(speed));
        }
        std::cout << fmt::format("T_L medium (transient) = {} N m at {} rpm\n", format_number(tr.torque),
                                 format_number(tr.speed_rpm));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wireless motor drive circuit models: design, phasor and transient engines, fault scenarios"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::function<int()> run;

    DesignArgs design;
    auto* c_design = app.add_subcommand("design", "Compensation capacitors for a coil");
    c_design->add_option("--L", design.inductance, "Coil inductance, e.g. 86.84uH")->required();
    c_design->add_option("--f", design.frequency, "Resonant frequency, e.g. 85kHz")->required();
    c_design->add_flag("--lcc", design.lcc, "Design an LCC triplet instead of a series capacitor");
    c_design->add_option("--rho", design.rho, "LCC ratio L_fm / L_rm")->capture_default_str();
    c_design->add_option("--R-fm", design.filter_resistance, "Filter inductor resistance");
    c_design->add_option("--measured-C", design.measured_c, "Measured series capacitor");
    c_design->add_option("--measured-C-rm", design.measured_c_rm, "Measured C_rm");
    c_design->add_option("--measured-C-fm", design.measured_c_fm, "Measured C_fm");
    c_design->add_option("--measured-L-fm", design.measured_l_fm, "Measured L_fm");
    c_design->callback([&] { run = [&] { return cmd_design(design); }; });

    SolveArgs solve;
    auto* c_solve = app.add_subcommand("solve", "Phasor solve at one operating point");
    add_common(c_solve, solve.common);
    c_solve->add_option("--rl", solve.rl, "DC load R_L (e.g. 12.18ohm, open); default from the network");
    c_solve->add_option("--f", solve.frequency, "Drive frequency; default nominal");
    c_solve->add_option("--drive", solve.drive, "Fundamental RMS drive voltage; default square wave of E");
    c_solve->add_option("--duty", solve.duty, "PFM duty ratio setting the drive");
    c_solve->add_flag("--no-limiter", solve.no_limiter, "Skip the DC input limiter");
    c_solve->add_flag("--reduced", solve.reduced, "Also run the reduced 2x2 solver");
    c_solve->callback([&] { run = [&] { return cmd_solve(solve); }; });

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep", "Frequency or AC-load sweep to CSV");
    add_common(c_sweep, sweep.common);
    c_sweep->add_option("--freq", sweep.freq, "Frequency grid lo:hi:n, e.g. 70kHz:100kHz:121");
    c_sweep->add_option("--rle", sweep.rle, "AC-side load grid lo:hi:n, e.g. 1ohm:100ohm:100");
    c_sweep->add_option("--rl", sweep.rl, "DC load for frequency sweeps");
    c_sweep->add_option("--f", sweep.frequency, "Frequency for load sweeps");
    c_sweep->add_option("--variants", sweep.variants, "compensation | coupling | base")->capture_default_str();
    c_sweep->add_option("--scales", sweep.scales, "Coupling scale factors")->capture_default_str();
    c_sweep->callback([&] { run = [&] { return cmd_sweep(sweep); }; });

    ZpaArgs zpa;
    auto* c_zpa = app.add_subcommand("zpa", "Input phase around the nominal frequency for several loads");
    add_common(c_zpa, zpa.common);
    c_zpa->add_option("--rl-list", zpa.rl_list, "DC loads")->capture_default_str();
    c_zpa->add_option("--freq", zpa.freq, "Frequency grid")->capture_default_str();
    c_zpa->add_option("--window", zpa.window, "Allowed zero-crossing offset")->capture_default_str();
    c_zpa->add_option("--max-phase", zpa.max_phase, "Allowed |phase| at f, degrees")->capture_default_str();
    c_zpa->callback([&] { run = [&] { return cmd_zpa(zpa); }; });

    FaultArgs fault;
    auto* c_fault = app.add_subcommand("fault", "Fault scenario with the DC limiter active");
    add_common(c_fault, fault.common);
    c_fault->add_option("--kind", fault.kind, "none | motor_short | motor_open | receiver_open | "
                                              "receiver_short_lfm_open | all")
        ->capture_default_str();
    c_fault->add_option("--engine", fault.engine, "phasor | transient")->capture_default_str();
    c_fault->add_option("--fraction", fault.fraction, "Suppression threshold fraction")->capture_default_str();
    c_fault->add_option("--post-time", fault.post_time, "Transient: time after the fault")->capture_default_str();
    c_fault->add_option("--load", fault.load, "Transient: no-load | medium | rated")->capture_default_str();
    c_fault->add_option("--duty", fault.duty, "Transient: PFM duty")->capture_default_str();
    c_fault->add_option("--decimation", fault.decimation, "Transient: waveform decimation")->capture_default_str();
    c_fault->callback([&] { run = [&] { return cmd_fault(fault); }; });

    CurveArgs curve;
    auto* c_curve = app.add_subcommand("curve", "Efficiency versus output power");
    add_common(c_curve, curve.common);
    c_curve->add_option("--grid", curve.grid, "DC load grid lo:hi:n")->capture_default_str();
    c_curve->add_option("--band-lo", curve.band_lo, "Lower edge of the checked power band")->capture_default_str();
    c_curve->add_option("--band-hi", curve.band_hi, "Upper edge of the checked power band")->capture_default_str();
    c_curve->callback([&] { run = [&] { return cmd_curve(curve); }; });

    TransientArgs tr;
    auto* c_tr = app.add_subcommand("transient", "Time-domain run to steady state");
    add_common(c_tr, tr.common);
    c_tr->add_option("--load", tr.load, "no-load | medium | rated")->capture_default_str();
    c_tr->add_option("--duty", tr.duty, "PFM duty ratio")->capture_default_str();
    c_tr->add_option("--max-den", tr.max_denominator, "Largest N1+N2 for the duty pattern")->capture_default_str();
    c_tr->add_option("--steps-per-period", tr.steps_per_period, "RK4 steps per 1/f")->capture_default_str();
    c_tr->add_option("--max-periods", tr.max_periods, "Pattern-period budget")->capture_default_str();
    c_tr->add_option("--decimation", tr.decimation, "Waveform decimation, 0 = none")->capture_default_str();
    c_tr->add_option("--tail", tr.tail, "Waveform length kept at the end")->capture_default_str();
    c_tr->add_flag("--no-limiter", tr.no_limiter, "Ideal DC source");
    c_tr->callback([&] { run = [&] { return cmd_transient(tr); }; });

    PfmArgs pfm;
    auto* c_pfm = app.add_subcommand("pfm", "PFM segment train and spectrum");
    add_common(c_pfm, pfm.common);
    c_pfm->add_option("--duty", pfm.duty, "Duty ratio");
    c_pfm->add_option("--n1", pfm.n1, "Fast periods");
    c_pfm->add_option("--n2", pfm.n2, "Slow periods");
    c_pfm->add_option("--max-den", pfm.max_denominator, "Largest N1+N2 for --duty")->capture_default_str();
    c_pfm->add_option("--amplitude", pfm.amplitude, "Square-wave amplitude E; default source voltage");
    c_pfm->add_option("--f", pfm.frequency, "Base frequency; default nominal");
    c_pfm->add_option("--order", pfm.order, "Pulse order n")->capture_default_str();
    c_pfm->add_option("--harmonics", pfm.harmonics, "Pattern harmonics in the spectrum")->capture_default_str();
    c_pfm->callback([&] { run = [&] { return cmd_pfm(pfm); }; });

    Common validate;
    auto* c_validate = app.add_subcommand("validate", "Check a network description");
    add_common(c_validate, validate, false);
    c_validate->callback([&] { run = [&] { return cmd_validate(validate); }; });

    Common exp;
    std::string export_path;
    auto* c_export = app.add_subcommand("export", "Write the network as JSON");
    add_common(c_export, exp, false);
    c_export->add_option("--write", export_path, "Output file; default stdout");
    c_export->callback([&] { run = [&] { return cmd_export(exp, export_path); }; });

    Common fitc;
    bool refine = false;
    auto* c_fit = app.add_subcommand("fit-motor", "Fit the DC motor model to the measured operating points");
    add_common(c_fit, fitc, false);
    c_fit->add_flag("--refine", refine, "Re-fit the medium torque with the transient engine (slow)");
    c_fit->callback([&] { run = [&] { return cmd_fit_motor(fitc, refine); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return kExitUsage;
    }

    try {
        return run();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
