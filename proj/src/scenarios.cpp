#include "wmd/scenarios.hpp"

#include "wmd/error.hpp"
#include "wmd/motor_fit.hpp"
#include "wmd/parallel.hpp"
#include "wmd/pfm.hpp"

#include <algorithm>
#include <cmath>

namespace wmd {

namespace {

Verdict classify(bool limiter_engaged, double pre_i_t, double post_i_t, double fraction) {
    if (limiter_engaged) {
        return Verdict::limited;
    }
    if (post_i_t < fraction * pre_i_t) {
        return Verdict::suppressed;
    }
    return Verdict::normal;
}

ScenarioResult run_phasor_fault(const NetworkDescription& network, FaultKind kind, const ScenarioOptions& options) {
    ScenarioResult result;
    result.kind = kind;
    result.engine = Engine::phasor;

    const OperatingPoint op = nominal_operating_point(network);
    const PhasorSolution pre = apply_dc_limiter(solve_full(network, op), network.source);
    result.pre_i_t = std::abs(pre.i_t);
    result.pre_i_rm = std::abs(pre.i_rm());

    const NetworkDescription faulted = apply_fault(network, kind);
    OperatingPoint fop = op;
    fop.motor_load = faulted.motoring_unit().motor.dc_resistance;
    const PhasorSolution raw = solve_full(faulted, fop);
    const PhasorSolution post = apply_dc_limiter(raw, faulted.source);
    result.unclamped_i_t = std::abs(raw.i_t);
    result.post_i_t = std::abs(post.i_t);
    result.post_i_rm = std::abs(post.i_rm());
    result.limiter_engaged = post.limiter_engaged;
    result.suppression_threshold = options.suppression_fraction * result.pre_i_t;
    result.verdict = classify(result.limiter_engaged, result.pre_i_t, result.post_i_t, options.suppression_fraction);
    return result;
}

struct PreFault {
    NetworkDescription network;
    MotorParams motor;
    double i_t = 0.0;
    double i_rm = 0.0;
    TransientState state;
    std::vector<WaveformSample> tail;
};

PreFault transient_pre_fault(const NetworkDescription& network, const ScenarioOptions& options) {
    PreFault pre;
    pre.motor = options.motor.value_or(table1_motor_fit().with_load(LoadCase::rated));
    // The transient engine takes the motor model in place of R_L; a finite
    // placeholder keeps the motor connected before the fault.
    pre.network = network;
    LoadResistance& rl = pre.network.motoring_unit().motor.dc_resistance;
    if (rl.is_open() || rl.is_short()) {
        rl = LoadResistance::ohms(1.0);
    }
    SimConfig quiet = options.sim;
    quiet.waveform_decimation = 0;
    const SteadyStateReport steady = run_to_steady_state(pre.network, pre.motor, options.pattern, pre.network.source, quiet);
    pre.i_t = std::abs(steady.i_t_fundamental);
    pre.i_rm = std::abs(steady.i_rm_fundamental);
    pre.state = steady.final_state;
    if (options.sim.waveform_decimation > 0 && options.pre_fault_tail > 0.0) {
        SimConfig tail = options.sim;
        tail.initial_state = steady.final_state;
        const auto periods = static_cast<std::size_t>(std::ceil(options.pre_fault_tail / options.pattern.period()));
        const SteadyStateReport t = run_for(pre.network, pre.motor, options.pattern, pre.network.source, tail, periods);
        pre.state = t.final_state;
        for (WaveformSample s : t.waveform) {
            s.time -= t.simulated_time;
            pre.tail.push_back(s);
        }
    }
    return pre;
}

ScenarioResult run_transient_fault(const PreFault& pre, FaultKind kind, const ScenarioOptions& options) {
    ScenarioResult result;
    result.kind = kind;
    result.engine = Engine::transient;
    result.pre_i_t = pre.i_t;
    result.pre_i_rm = pre.i_rm;

    SimConfig post_config = options.sim;
    post_config.initial_state = pre.state;
    const NetworkDescription faulted = apply_fault(pre.network, kind);
    const auto periods = static_cast<std::size_t>(std::ceil(options.post_fault_time / options.pattern.period()));
    const SteadyStateReport post =
        run_for(faulted, pre.motor, options.pattern, faulted.source, post_config, std::max<std::size_t>(periods, 1));
    result.post_i_t = std::abs(post.i_t_fundamental);
    result.post_i_rm = std::abs(post.i_rm_fundamental);
    result.limiter_engaged = post.limiter_engaged;
    result.suppression_threshold = options.suppression_fraction * result.pre_i_t;
    result.verdict = classify(result.limiter_engaged, result.pre_i_t, result.post_i_t, options.suppression_fraction);
    result.waveform = pre.tail;
    result.waveform.insert(result.waveform.end(), post.waveform.begin(), post.waveform.end());
    return result;
}

}  // namespace

std::string to_string(FaultKind kind) {
    switch (kind) {
        case FaultKind::none:
            return "none";
        case FaultKind::motor_short:
            return "motor_short";
        case FaultKind::motor_open:
            return "motor_open";
        case FaultKind::receiver_open:
            return "receiver_open";
        case FaultKind::receiver_short_lfm_open:
            return "receiver_short_lfm_open";
    }
    return "none";
}

std::string to_string(Engine engine) { return engine == Engine::phasor ? "phasor" : "transient"; }

std::string to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::normal:
            return "normal";
        case Verdict::suppressed:
            return "suppressed";
        case Verdict::limited:
            return "limited";
    }
    return "normal";
}

FaultKind parse_fault_kind(const std::string& text) {
    for (const FaultKind k : all_fault_kinds()) {
        if (text == to_string(k)) {
            return k;
        }
    }
    throw ConfigError("unknown fault kind '" + text + "'");
}

Engine parse_engine(const std::string& text) {
    if (text == "phasor") {
        return Engine::phasor;
    }
    if (text == "transient") {
        return Engine::transient;
    }
    throw ConfigError("unknown engine '" + text + "' (expected phasor or transient)");
}

const std::vector<FaultKind>& all_fault_kinds() {
    static const std::vector<FaultKind> kinds{FaultKind::none, FaultKind::motor_short, FaultKind::motor_open,
                                              FaultKind::receiver_open, FaultKind::receiver_short_lfm_open};
    return kinds;
}

NetworkDescription apply_fault(NetworkDescription network, FaultKind kind) {
    WmdUnit& unit = network.motoring_unit();
    switch (kind) {
        case FaultKind::none:
            break;
        case FaultKind::motor_short:
            unit.motor.dc_resistance = LoadResistance::short_circuit();
            break;
        case FaultKind::motor_open:
            unit.motor.dc_resistance = LoadResistance::open();
            break;
        case FaultKind::receiver_open:
            unit.receiver_circuit = ReceiverCircuit::coil_open;
            break;
        case FaultKind::receiver_short_lfm_open:
            unit.receiver_circuit = ReceiverCircuit::filter_open;
            break;
    }
    return network;
}

std::vector<ScenarioResult> run_faults(const NetworkDescription& network, std::span<const FaultKind> kinds,
                                       Engine engine, const ScenarioOptions& options, unsigned jobs) {
    if (!(options.suppression_fraction > 0.0 && options.suppression_fraction < 1.0)) {
        throw DomainError("suppression fraction must lie in (0, 1)");
    }
    check_invariants(network);
    std::vector<ScenarioResult> results(kinds.size());
    if (engine == Engine::phasor) {
        for (std::size_t k = 0; k < kinds.size(); ++k) {
            results[k] = run_phasor_fault(network, kinds[k], options);
        }
        return results;
    }
    if (!(options.post_fault_time > 0.0) || !(options.pre_fault_tail >= 0.0)) {
        throw DomainError("post-fault time must be > 0 and the pre-fault tail >= 0");
    }
    const PreFault pre = transient_pre_fault(network, options);
    parallel_for(kinds.size(), jobs, [&](std::size_t k) { results[k] = run_transient_fault(pre, kinds[k], options); });
    return results;
}

ScenarioResult run_fault(const NetworkDescription& network, FaultKind kind, Engine engine,
                         const ScenarioOptions& options) {
    return run_faults(network, std::span<const FaultKind>(&kind, 1), engine, options).front();
}

Verdict expected_verdict(FaultKind kind) {
    switch (kind) {
        case FaultKind::none:
            return Verdict::normal;
        case FaultKind::motor_short:
        case FaultKind::receiver_open:
            return Verdict::suppressed;
        case FaultKind::motor_open:
        case FaultKind::receiver_short_lfm_open:
            return Verdict::limited;
    }
    return Verdict::normal;
}

std::vector<EfficiencyCurvePoint> efficiency_vs_power(const NetworkDescription& network,
                                                      std::span<const double> r_l_grid, unsigned jobs) {
    if (r_l_grid.empty()) {
        throw DomainError("efficiency curve needs a non-empty R_L grid");
    }
    check_invariants(network);
    const double drive = square_wave_fundamental_rms(network.source.voltage_limit);
    std::vector<EfficiencyCurvePoint> points(r_l_grid.size());
    parallel_for(r_l_grid.size(), jobs, [&](std::size_t k) {
        OperatingPoint op;
        op.frequency = network.nominal_frequency;
        op.drive_rms = drive;
        op.motor_load = LoadResistance::ohms(r_l_grid[k]);
        const PhasorSolution sol = apply_dc_limiter(solve_full(network, op), network.source);
        points[k] = EfficiencyCurvePoint{r_l_grid[k], sol.p_out, sol.efficiency, sol.limiter_engaged};
    });
    std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
        return a.output_power < b.output_power;
    });
    return points;
}

std::vector<ZpaCurve> zpa_analysis(const NetworkDescription& network, std::span<const double> r_l_values,
                                   double f_min, double f_max, std::size_t n_points, unsigned jobs) {
    const double drive = square_wave_fundamental_rms(network.source.voltage_limit);
    std::vector<ZpaCurve> curves;
    for (const double r_l : r_l_values) {
        ZpaCurve c;
        c.r_l = r_l;
        const LoadResistance load = LoadResistance::ohms(r_l);
        c.rows = input_impedance_sweep(network, load, f_min, f_max, n_points, drive, jobs);
        c.zero_crossing = phase_zero_crossing_near(c.rows, network.nominal_frequency);
        OperatingPoint op{network.nominal_frequency, drive, load};
        c.phase_at_nominal_deg = solve_full(network, op).phase_deg();
        curves.push_back(std::move(c));
    }
    return curves;
}

std::vector<NetworkVariant> compensation_variants(const NetworkDescription& network) {
    return {
        {"lcc-rho0.5", with_lcc_ratio(network, 0.5)},
        {"lcc-rho0.25", with_lcc_ratio(network, 0.25)},
        {"series", with_series_receiver(network)},
    };
}

std::vector<NetworkVariant> coupling_variants(const NetworkDescription& network, std::span<const double> scales) {
    std::vector<NetworkVariant> out;
    for (const double s : scales) {
        char name[32];
        std::snprintf(name, sizeof name, "M-x%.3g", s);
        out.push_back({name, with_scaled_coupling(network, s, s)});
    }
    return out;
}

}  // namespace wmd
