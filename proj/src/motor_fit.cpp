#include "wmd/motor_fit.hpp"

#include "wmd/error.hpp"
#include "wmd/pfm.hpp"
#include "wmd/phasor.hpp"

#include <cmath>
#include <functional>

namespace wmd {

namespace {

constexpr double kRpmToRadPerSec = 2.0 * kPi / 60.0;
constexpr int kBisectionSteps = 200;

struct DcDelivery {
    double i_dc = 0.0;
    double scale = 1.0;
    double p_in = 0.0;
    double p_out = 0.0;
};

// Average rectified current delivered into R_L at the given duty.
DcDelivery deliver(const NetworkDescription& network, double r_l, double duty) {
    OperatingPoint op;
    op.frequency = network.nominal_frequency;
    op.drive_rms = harmonic_rms(network.source.voltage_limit, duty, 1);
    op.motor_load = LoadResistance::ohms(r_l);
    const PhasorSolution sol = solve_full(network, op);
    DcDelivery out;
    const double bus_current = sol.p_in / network.source.voltage_limit;
    out.scale = bus_current > network.source.current_limit ? network.source.current_limit / bus_current : 1.0;
    out.i_dc = 2.0 * std::sqrt(2.0) / kPi * std::abs(sol.i_fm()) * out.scale;
    out.p_in = sol.p_in * out.scale * out.scale;
    out.p_out = sol.p_out * out.scale * out.scale;
    return out;
}

// Root of a function that is positive at lo and negative at hi.
double bisect(const std::function<double(double)>& g, double lo, double hi) {
    if (g(lo) <= 0.0 || g(hi) >= 0.0) {
        throw SolverError("motor fit: operating point is not bracketed");
    }
    for (int k = 0; k < kBisectionSteps && hi - lo > 1e-12 * std::max(1.0, hi); ++k) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Armature current that the network sustains at fixed speed.
double current_at_speed(const NetworkDescription& network, const MotorParams& motor, double omega, double duty) {
    const auto excess = [&](double i_m) {
        const double r_l = (motor.armature_resistance * i_m + motor.back_emf_constant * omega) / i_m;
        return deliver(network, r_l, duty).i_dc - i_m;
    };
    return bisect(excess, 1e-6, 100.0);
}

}  // namespace

std::string to_string(LoadCase load) {
    switch (load) {
        case LoadCase::no_load:
            return "no-load";
        case LoadCase::medium:
            return "medium";
        case LoadCase::rated:
            return "rated";
    }
    return "rated";
}

LoadCase parse_load_case(const std::string& text) {
    if (text == "no-load" || text == "none") {
        return LoadCase::no_load;
    }
    if (text == "medium") {
        return LoadCase::medium;
    }
    if (text == "rated") {
        return LoadCase::rated;
    }
    throw ConfigError("unknown load case '" + text + "' (expected no-load, medium or rated)");
}

QuasiStaticPoint quasi_static_point(const NetworkDescription& network, const MotorParams& motor, double duty) {
    check_motor(motor);
    const double kt = motor.torque_constant();
    const auto point_at = [&](double omega) {
        const double i_m = (motor.load_torque + motor.viscous_friction * omega) / kt;
        const double u_m = motor.armature_resistance * i_m + motor.back_emf_constant * omega;
        return std::pair{i_m, u_m};
    };
    const auto surplus = [&](double omega) {
        const auto [i_m, u_m] = point_at(omega);
        if (i_m <= 0.0) {
            return 1.0;
        }
        return deliver(network, u_m / i_m, duty).i_dc - i_m;
    };
    QuasiStaticPoint p;
    if (surplus(0.0) <= 0.0) {
        // Stalled: the network cannot overcome the load torque.
        return p;
    }
    const double omega_max = 4.0 * network.source.voltage_limit / motor.back_emf_constant;
    const double omega = bisect(surplus, 0.0, omega_max);
    const auto [i_m, u_m] = point_at(omega);
    p.speed_rpm = omega / kRpmToRadPerSec;
    p.i_m = i_m;
    p.u_m = u_m;
    p.r_l = i_m > 0.0 ? u_m / i_m : 0.0;
    const DcDelivery d = deliver(network, p.r_l, duty);
    p.drive_scale = d.scale;
    p.p_in = d.p_in;
    p.p_out = d.p_out;
    return p;
}

MotorParams MotorFit::with_load(LoadCase load) const {
    MotorParams m = base;
    switch (load) {
        case LoadCase::no_load:
            m.load_torque = 0.0;
            break;
        case LoadCase::medium:
            m.load_torque = medium_torque;
            break;
        case LoadCase::rated:
            m.load_torque = rated_torque;
            break;
    }
    return m;
}

MotorFit fit_motor(const NetworkDescription& network, const MotorFitTargets& t) {
    check_invariants(network);
    MotorFit fit;
    fit.targets = t;
    const double w_rated = t.rated_speed_rpm * kRpmToRadPerSec;
    const double w_nl = t.no_load_speed_rpm * kRpmToRadPerSec;
    const double w_med = t.medium_speed_rpm * kRpmToRadPerSec;

    fit.base.armature_resistance = t.armature_resistance;
    fit.base.armature_inductance = t.armature_inductance;
    fit.base.inertia = t.inertia;
    fit.base.back_emf_constant = (t.rated_voltage - t.armature_resistance * t.rated_current) / w_rated;
    fit.base.load_torque = 0.0;
    fit.base.viscous_friction = 0.0;
    check_motor(fit.base);

    const double i_nl = current_at_speed(network, fit.base, w_nl, 1.0);
    fit.base.viscous_friction = fit.base.torque_constant() * i_nl / w_nl;
    fit.rated_torque = fit.base.torque_constant() * t.rated_current - fit.base.viscous_friction * w_rated;
    const double i_med = current_at_speed(network, fit.base, w_med, t.medium_duty);
    fit.medium_torque = fit.base.torque_constant() * i_med - fit.base.viscous_friction * w_med;
    fit.medium_torque_quasi_static = fit.medium_torque;
    if (fit.rated_torque < 0.0 || fit.medium_torque < 0.0) {
        throw SolverError("motor fit produced a negative load torque");
    }

    const QuasiStaticPoint nl = quasi_static_point(network, fit.with_load(LoadCase::no_load), 1.0);
    const QuasiStaticPoint med = quasi_static_point(network, fit.with_load(LoadCase::medium), t.medium_duty);
    const QuasiStaticPoint rated = quasi_static_point(network, fit.with_load(LoadCase::rated), 1.0);
    fit.residuals = {
        {"no-load speed [rpm]", t.no_load_speed_rpm, nl.speed_rpm},
        {"medium speed [rpm]", t.medium_speed_rpm, med.speed_rpm},
        {"rated speed [rpm]", t.rated_speed_rpm, rated.speed_rpm},
        {"rated U_m [V]", t.rated_voltage, rated.u_m},
        {"rated I_m [A]", t.rated_current, rated.i_m},
    };
    return fit;
}

TorqueRefinement refine_medium_torque(const NetworkDescription& network, const MotorFit& fit,
                                      const SimConfig& config, double speed_tolerance_rpm) {
    const MotorFitTargets& t = fit.targets;
    const PfmPattern pattern = pattern_from_duty(t.medium_duty, 16, network.nominal_frequency);
    TorqueRefinement out;
    const auto speed_error = [&](double torque) {
        MotorParams m = fit.base;
        m.load_torque = torque;
        const SteadyStateReport r = run_to_steady_state(network, m, pattern, network.source, config);
        out.trace.emplace_back(torque, r.speed_rpm);
        return r.speed_rpm - t.medium_speed_rpm;
    };
    // Speed falls with torque. Widen downwards until the bracket holds.
    double hi = fit.medium_torque_quasi_static;
    double f_hi = speed_error(hi);
    double lo = 0.9 * hi;
    double f_lo = speed_error(lo);
    for (int k = 0; f_hi > 0.0 && k < 8; ++k) {
        lo = hi;
        f_lo = f_hi;
        hi *= 1.05;
        f_hi = speed_error(hi);
    }
    for (int k = 0; f_lo < 0.0 && k < 8; ++k) {
        hi = lo;
        f_hi = f_lo;
        lo *= 0.9;
        f_lo = speed_error(lo);
    }
    if (f_lo < 0.0 || f_hi > 0.0) {
        throw SolverError("transient medium-torque fit: no bracket around the target speed");
    }
    // Illinois variant of regula falsi.
    int side = 0;
    for (int k = 0; k < 40; ++k) {
        const double mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        const double f_mid = speed_error(mid);
        if (std::abs(f_mid) <= speed_tolerance_rpm) {
            out.torque = mid;
            out.speed_rpm = f_mid + t.medium_speed_rpm;
            return out;
        }
        if (f_mid > 0.0) {
            lo = mid;
            f_lo = f_mid;
            if (side == 1) {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = mid;
            f_hi = f_mid;
            if (side == -1) {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    throw SolverError("transient medium-torque fit did not converge");
}

const MotorFit& table1_motor_fit() {
    static const MotorFit fit = [] {
        MotorFit f = fit_motor(table1_preset());
        f.medium_torque = kTable1MediumTorque;
        return f;
    }();
    return fit;
}

}  // namespace wmd
