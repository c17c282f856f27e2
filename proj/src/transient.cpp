#include "wmd/transient.hpp"

#include "wmd/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <deque>

namespace wmd {

namespace {

// State vector layout. Everything after V_BUS is a running integral that
// rides along with RK4 so window averages carry the same order of accuracy.
enum Idx : std::size_t {
    I_T, I_12, I_RM, I_FM,
    V_CT, V_C1, V_C2, V_CRM, V_CFM, V_CM,
    I_M, OMEGA, V_BUS,
    W_IN, W_ABS, W_OHMIC, W_MECH, W_DIODE, W_MOTOR, Q_SRC,
    S_IT2, S_I122, S_IRM2, S_IFM2, S_VCM, S_IM, S_OMEGA, S_VBUS,
    N_STATE
};

using Vec = std::array<double, N_STATE>;

constexpr double kRadPerSecToRpm = 60.0 / (2.0 * kPi);
constexpr double kDeviationFlag = 0.05;
constexpr double kAbsoluteFloor = 1e-9;

enum class MotorTerminal { connected, disconnected, shorted };

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

struct Plant {
    // tanks
    double l_t = 0, l_12 = 0, l_rm = 0, m1 = 0, m2 = 0;
    double r_t = 0, r_12 = 0, r_rm = 0, r_fm = 0;
    double c_t = 0, c_1 = 0, c_2 = 0, c_rm = 0, c_fm = 0, l_fm = 0;
    Eigen::Matrix3d l_inv = Eigen::Matrix3d::Zero();
    bool coil_open = false;
    bool filter_open = false;
    // DC side
    double c_m = 1.0;
    double diode_drop = 0.0;
    MotorTerminal terminal = MotorTerminal::connected;
    MotorParams motor;
    // source
    double e = 0.0, i_lim = 0.0, r_src = 1.0, c_bus = 1.0;
    bool limiter = false;

    Plant(const NetworkDescription& network, const MotorParams& motor_params, double diode, double dc_link,
          const DcSource& source, double source_resistance, double bus_capacitance, bool limiter_enabled)
        : motor(motor_params) {
        const WmdUnit& unit = network.motoring_unit();
        if (!unit.has_lcc()) {
            throw DomainError("transient engine models LCC receivers only");
        }
        const auto& lcc = std::get<LccCompensation>(unit.receiver_compensation);
        l_t = network.transmitter.coil.inductance;
        r_t = network.transmitter.coil.ac_resistance;
        c_t = network.transmitter.compensation.capacitance;
        l_12 = unit.repeater_part1.coil.inductance + unit.repeater_part2.coil.inductance;
        r_12 = unit.repeater_part1.coil.ac_resistance + unit.repeater_part2.coil.ac_resistance;
        c_1 = unit.repeater_part1.compensation.capacitance;
        c_2 = unit.repeater_part2.compensation.capacitance;
        l_rm = unit.receiver_coil.inductance;
        r_rm = unit.receiver_coil.ac_resistance;
        c_rm = lcc.series_capacitance;
        c_fm = lcc.filter_capacitance;
        l_fm = lcc.filter_inductance;
        r_fm = lcc.filter_resistance;
        m1 = unit.link_to_transmitter.mutual_inductance;
        m2 = unit.link_repeater_to_receiver.mutual_inductance;
        coil_open = unit.receiver_circuit == ReceiverCircuit::coil_open;
        filter_open = unit.receiver_circuit == ReceiverCircuit::filter_open;

        const auto& rl = unit.motor.dc_resistance;
        terminal = rl.is_open() ? MotorTerminal::disconnected
                                : (rl.is_short() ? MotorTerminal::shorted : MotorTerminal::connected);

        Eigen::Matrix3d l;
        l << l_t, -m1, 0.0, -m1, l_12, -m2, 0.0, -m2, l_rm;
        Eigen::LLT<Eigen::Matrix3d> llt(l);
        if (llt.info() != Eigen::Success || !(l.determinant() > 0.0)) {
            throw SolverError("coupled inductance matrix is not positive definite (|M| >= sqrt(L1 L2))");
        }
        l_inv = l.inverse();
        if (coil_open) {
            // Receiver loop carries no current: drop its row and column.
            const double det = l_t * l_12 - m1 * m1;
            l_inv.setZero();
            l_inv(0, 0) = l_12 / det;
            l_inv(0, 1) = l_inv(1, 0) = m1 / det;
            l_inv(1, 1) = l_t / det;
        }

        diode_drop = diode;
        c_m = dc_link;
        e = source.voltage_limit;
        i_lim = source.current_limit;
        r_src = source_resistance;
        c_bus = bus_capacitance;
        limiter = limiter_enabled;
    }

    [[nodiscard]] double rectifier_threshold(double v_cm) const {
        const double u = terminal == MotorTerminal::shorted ? 0.0 : v_cm;
        return u + 2.0 * diode_drop;
    }

    // Conduction direction of the bridge: +1, -1 or 0 (blocking).
    [[nodiscard]] int conduction(double i_fm, double v_cfm, double v_cm) const {
        if (filter_open) {
            return 0;
        }
        if (i_fm != 0.0) {
            return sign_of(i_fm);
        }
        const double threshold = rectifier_threshold(v_cm);
        if (v_cfm > threshold) {
            return 1;
        }
        if (v_cfm < -threshold) {
            return -1;
        }
        return 0;
    }

    [[nodiscard]] double source_current(double v_bus) const {
        return std::clamp((e - v_bus) / r_src, 0.0, i_lim);
    }

    [[nodiscard]] double mechanical_rate(double i_m, double omega) const {
        const double drive = motor.torque_constant() * i_m - motor.viscous_friction * omega;
        const double tl = motor.load_torque;
        if (omega > 0.0) {
            return (drive - tl) / motor.inertia;
        }
        if (omega < 0.0) {
            return (drive + tl) / motor.inertia;
        }
        if (drive > tl) {
            return (drive - tl) / motor.inertia;
        }
        if (drive < -tl) {
            return (drive + tl) / motor.inertia;
        }
        return 0.0;
    }

    // Tank, rectifier, DC link and motor; u_in is the inverter output. The
    // bridge direction `cond` is held fixed over a step so every RK4 stage
    // sees the same smooth system.
    void electrical(const Vec& x, double u_in, int cond, Vec& d) const {
        const double e_t = u_in - r_t * x[I_T] - x[V_CT];
        const double e_12 = -r_12 * x[I_12] - x[V_C1] - x[V_C2];
        const double e_rm = coil_open ? 0.0 : -r_rm * x[I_RM] - x[V_CRM] - x[V_CFM];
        const Eigen::Vector3d di = l_inv * Eigen::Vector3d(e_t, e_12, e_rm);
        d[I_T] = di(0);
        d[I_12] = di(1);
        d[I_RM] = coil_open ? 0.0 : di(2);

        d[V_CT] = x[I_T] / c_t;
        d[V_C1] = x[I_12] / c_1;
        d[V_C2] = x[I_12] / c_2;
        d[V_CRM] = x[I_RM] / c_rm;

        const double threshold = rectifier_threshold(x[V_CM]);
        d[I_FM] = cond == 0 ? 0.0 : (x[V_CFM] - r_fm * x[I_FM] - cond * threshold) / l_fm;
        d[V_CFM] = (x[I_RM] - x[I_FM]) / c_fm;
        const double i_rect = cond * x[I_FM];

        const double ke = motor.back_emf_constant;
        double motor_power = 0.0;
        switch (terminal) {
            case MotorTerminal::connected: {
                const double net = i_rect - x[I_M];
                d[V_CM] = (x[V_CM] <= 0.0 && net < 0.0) ? 0.0 : net / c_m;
                d[I_M] = (x[V_CM] - motor.armature_resistance * x[I_M] - ke * x[OMEGA]) /
                         motor.armature_inductance;
                motor_power = x[V_CM] * x[I_M];
                break;
            }
            case MotorTerminal::disconnected:
                d[V_CM] = i_rect / c_m;
                d[I_M] = 0.0;
                break;
            case MotorTerminal::shorted:
                d[V_CM] = 0.0;
                d[I_M] = (-motor.armature_resistance * x[I_M] - ke * x[OMEGA]) / motor.armature_inductance;
                break;
        }
        d[OMEGA] = mechanical_rate(x[I_M], x[OMEGA]);

        d[W_IN] = u_in * x[I_T];
        d[W_ABS] = std::abs(u_in * x[I_T]);
        d[W_OHMIC] = r_t * x[I_T] * x[I_T] + r_12 * x[I_12] * x[I_12] + r_rm * x[I_RM] * x[I_RM] +
                     r_fm * x[I_FM] * x[I_FM] + motor.armature_resistance * x[I_M] * x[I_M];
        d[W_MECH] = motor.viscous_friction * x[OMEGA] * x[OMEGA] + motor.load_torque * std::abs(x[OMEGA]);
        d[W_DIODE] = 2.0 * diode_drop * i_rect;
        d[W_MOTOR] = motor_power;
        d[S_IT2] = x[I_T] * x[I_T];
        d[S_I122] = x[I_12] * x[I_12];
        d[S_IRM2] = x[I_RM] * x[I_RM];
        d[S_IFM2] = x[I_FM] * x[I_FM];
        d[S_VCM] = x[V_CM];
        d[S_IM] = x[I_M];
        d[S_OMEGA] = x[OMEGA];
    }

    // Full right-hand side including the inverter bus, for switch state s.
    [[nodiscard]] Vec rhs(const Vec& x, int s, int cond) const {
        Vec d{};
        const double v_bus = x[V_BUS];
        electrical(x, s * v_bus, cond, d);
        const double i_inv = s * x[I_T];
        if (limiter) {
            const double i_src = source_current(v_bus);
            const double net = i_src - i_inv;
            d[V_BUS] = (v_bus <= 0.0 && net < 0.0) ? 0.0 : net / c_bus;
            d[Q_SRC] = i_src;
        } else {
            d[V_BUS] = 0.0;
            d[Q_SRC] = i_inv;
        }
        d[S_VBUS] = v_bus;
        return d;
    }

    [[nodiscard]] double stored(const Vec& x) const {
        double w = 0.5 * (l_t * x[I_T] * x[I_T] + l_12 * x[I_12] * x[I_12] + l_rm * x[I_RM] * x[I_RM]) -
                   m1 * x[I_T] * x[I_12] - m2 * x[I_12] * x[I_RM];
        w += 0.5 * l_fm * x[I_FM] * x[I_FM];
        w += 0.5 * (c_t * x[V_CT] * x[V_CT] + c_1 * x[V_C1] * x[V_C1] + c_2 * x[V_C2] * x[V_C2] +
                    c_rm * x[V_CRM] * x[V_CRM] + c_fm * x[V_CFM] * x[V_CFM] + c_m * x[V_CM] * x[V_CM]);
        w += 0.5 * motor.armature_inductance * x[I_M] * x[I_M];
        w += 0.5 * motor.inertia * x[OMEGA] * x[OMEGA];
        return w;
    }

    // True when the rectifier leaves its step mode `cond`, or the DC-link
    // clamp, stiction or source clamp changes state over the step.
    [[nodiscard]] bool event_between(const Vec& a, const Vec& b, int cond) const {
        if (cond != 0 ? cond * b[I_FM] < 0.0 : conduction(0.0, b[V_CFM], b[V_CM]) != 0) {
            return true;
        }
        if ((a[V_CM] <= 0.0) != (b[V_CM] <= 0.0) || (a[OMEGA] == 0.0) != (b[OMEGA] == 0.0)) {
            return true;
        }
        if (limiter) {
            const auto saturated = [&](double v) { return (e - v) / r_src >= i_lim; };
            const auto idle = [&](double v) { return v >= e; };
            return saturated(a[V_BUS]) != saturated(b[V_BUS]) || idle(a[V_BUS]) != idle(b[V_BUS]);
        }
        return false;
    }

    // Zeroes the states of removed branches (used when a run starts from a
    // state computed on a different topology).
    void impose_topology(Vec& x) const {
        if (coil_open) {
            x[I_RM] = 0.0;
        }
        if (filter_open) {
            x[I_FM] = 0.0;
        }
        if (terminal == MotorTerminal::disconnected) {
            x[I_M] = 0.0;
        }
        if (terminal == MotorTerminal::shorted) {
            x[V_CM] = 0.0;
        }
    }

    // Event handling after a step. Energy removed by a forced state reset is
    // booked as dissipation so the audit stays a test of the integrator.
    void settle(const Vec& before, Vec& x, int cond) const {
        if (cond != 0 && cond * x[I_FM] < 0.0 && std::abs(x[V_CFM]) <= rectifier_threshold(x[V_CM])) {
            x[W_DIODE] += 0.5 * l_fm * x[I_FM] * x[I_FM];
            x[I_FM] = 0.0;
        }
        if (terminal == MotorTerminal::shorted) {
            x[V_CM] = 0.0;
        } else if (x[V_CM] < 0.0) {
            x[W_DIODE] += 0.5 * c_m * x[V_CM] * x[V_CM];
            x[V_CM] = 0.0;
        }
        if (terminal == MotorTerminal::disconnected) {
            x[I_M] = 0.0;
        }
        if (before[OMEGA] != 0.0 && sign_of(x[OMEGA]) != sign_of(before[OMEGA])) {
            const double drive = motor.torque_constant() * x[I_M];
            if (std::abs(drive) <= motor.load_torque) {
                x[W_MECH] += 0.5 * motor.inertia * x[OMEGA] * x[OMEGA];
                x[OMEGA] = 0.0;
            }
        }
        if (limiter && x[V_BUS] < 0.0) {
            x[V_BUS] = 0.0;
        }
        if (coil_open) {
            x[I_RM] = 0.0;
        }
    }
};

Plant make_plant(const NetworkDescription& network, const MotorParams& motor, const SimConfig& config,
                 const DcSource& source) {
    return Plant(network, motor, config.diode_drop, config.dc_link_capacitance, source,
                 config.source_resistance, config.bus_capacitance, config.limiter_enabled);
}

Vec to_vec(const TransientState& s) {
    Vec x{};
    x[I_T] = s.i_t;
    x[I_12] = s.i_12;
    x[I_RM] = s.i_rm;
    x[I_FM] = s.i_fm;
    x[V_CT] = s.v_ct;
    x[V_C1] = s.v_c1m;
    x[V_C2] = s.v_c2m;
    x[V_CRM] = s.v_crm;
    x[V_CFM] = s.v_cfm;
    x[V_CM] = s.v_cm;
    x[I_M] = s.i_m;
    x[OMEGA] = s.omega_m;
    x[V_BUS] = s.v_bus;
    return x;
}

TransientState to_state(const Vec& x, double time) {
    TransientState s;
    s.i_t = x[I_T];
    s.i_12 = x[I_12];
    s.i_rm = x[I_RM];
    s.i_fm = x[I_FM];
    s.v_ct = x[V_CT];
    s.v_c1m = x[V_C1];
    s.v_c2m = x[V_C2];
    s.v_crm = x[V_CRM];
    s.v_cfm = x[V_CFM];
    s.v_cm = x[V_CM];
    s.i_m = x[I_M];
    s.omega_m = x[OMEGA];
    s.v_bus = x[V_BUS];
    s.time = time;
    return s;
}

// Inverter switch state for every step of one pattern period.
std::vector<signed char> switching_table(const PfmPattern& pattern, unsigned steps_per_period) {
    std::vector<signed char> table;
    table.reserve(pattern.length_in_base_periods() * steps_per_period);
    const auto append = [&](std::size_t count, unsigned divisor) {
        const std::size_t half = static_cast<std::size_t>(divisor) * steps_per_period / 2;
        for (std::size_t p = 0; p < count; ++p) {
            table.insert(table.end(), half, static_cast<signed char>(1));
            table.insert(table.end(), half, static_cast<signed char>(-1));
        }
    };
    append(pattern.n1, pattern.fast_divisor());
    append(pattern.n2, pattern.slow_divisor());
    return table;
}

// Windowed fundamental projection of a piecewise-linear signal.
class Projector {
public:
    Projector(double omega, double dt) {
        const std::complex<double> j{0.0, 1.0};
        const std::complex<double> e_h = std::polar(1.0, -omega * dt);
        i0_ = (1.0 - e_h) / (j * omega);
        // integral of tau * exp(-j w tau) over [0, h]
        i1_ = (1.0 - e_h * (1.0 + j * omega * dt)) / (-omega * omega);
        rotation_ = e_h;
        omega_ = omega;
    }

    void start(double t) {
        phase_ = std::polar(1.0, -omega_ * t);
        acc_u_ = acc_it_ = acc_irm_ = {};
        steps_ = 0;
    }

    void add(double dt, std::array<double, 3> a, std::array<double, 3> b) {
        const auto term = [&](double x0, double x1) {
            const double slope = (x1 - x0) / dt;
            return phase_ * (x0 * i0_ + slope * i1_);
        };
        acc_u_ += term(a[0], b[0]);
        acc_it_ += term(a[1], b[1]);
        acc_irm_ += term(a[2], b[2]);
        phase_ *= rotation_;
        if (++steps_ % 1024 == 0) {
            phase_ /= std::abs(phase_);
        }
    }

    // RMS phasors (X = sqrt(2) * c1 with c1 the complex Fourier coefficient).
    [[nodiscard]] std::array<std::complex<double>, 3> result(double duration) const {
        const double scale = std::sqrt(2.0) / duration;
        return {acc_u_ * scale, acc_it_ * scale, acc_irm_ * scale};
    }

private:
    std::complex<double> i0_, i1_, rotation_, phase_{1.0, 0.0}, acc_u_, acc_it_, acc_irm_;
    double omega_ = 0.0;
    std::size_t steps_ = 0;
};

struct WindowMetrics {
    std::array<double, 8> values{};

    [[nodiscard]] bool close_to(const WindowMetrics& other, double tolerance) const {
        for (std::size_t k = 0; k < values.size(); ++k) {
            const double a = values[k];
            const double b = other.values[k];
            if (std::abs(a - b) > tolerance * std::max(std::abs(a), std::abs(b)) + kAbsoluteFloor) {
                return false;
            }
        }
        return true;
    }
};

class Simulation {
public:
    Simulation(const NetworkDescription& network, const MotorParams& motor, const PfmPattern& pattern,
               const DcSource& source, const SimConfig& config)
        : plant_(make_plant(network, motor, config, source)),
          config_(config),
          table_(switching_table(pattern, config.steps_per_period)),
          dt_(1.0 / (pattern.base_frequency * config.steps_per_period)),
          period_(static_cast<double>(table_.size()) * dt_),
          projector_(angular_frequency(pattern.base_frequency), dt_) {
        if (config.initial_state) {
            x_ = to_vec(*config.initial_state);
            plant_.impose_topology(x_);
        } else {
            x_[V_BUS] = source.voltage_limit;
        }
        if (!config.limiter_enabled) {
            x_[V_BUS] = source.voltage_limit;
        }
        const double window = std::max(config.convergence_window, period_);
        periods_per_window_ = static_cast<std::size_t>(std::ceil(window / period_ - 1e-9));
    }

    [[nodiscard]] std::size_t periods_per_window() const { return periods_per_window_; }

    // Advances one window and fills the report fields describing it.
    WindowMetrics advance_window(SteadyStateReport& report) {
        const Vec start = x_;
        const double t_start = time();
        projector_.start(t_start);
        double audit_worst = 0.0;
        bool clamped = false;
        for (std::size_t p = 0; p < periods_per_window_; ++p) {
            const Vec period_start = x_;
            for (std::size_t k = 0; k < table_.size(); ++k) {
                clamped = step(table_[k]) || clamped;
            }
            ++periods_done_;
            const double throughput = x_[W_ABS] - period_start[W_ABS];
            const double delivered = x_[W_IN] - period_start[W_IN];
            const double dissipated = (x_[W_OHMIC] - period_start[W_OHMIC]) + (x_[W_MECH] - period_start[W_MECH]) +
                                      (x_[W_DIODE] - period_start[W_DIODE]);
            const double residual = delivered - (plant_.stored(x_) - plant_.stored(period_start)) - dissipated;
            if (throughput > 0.0) {
                audit_worst = std::max(audit_worst, std::abs(residual) / throughput);
            }
            const double period_bus_current = (x_[Q_SRC] - period_start[Q_SRC]) / period_;
            report.peak_period_bus_current = std::max(report.peak_period_bus_current, period_bus_current);
        }
        const double span = time() - t_start;
        const auto diff = [&](Idx k) { return (x_[k] - start[k]) / span; };

        report.rms_i_t = std::sqrt(std::max(0.0, diff(S_IT2)));
        report.rms_i_12 = std::sqrt(std::max(0.0, diff(S_I122)));
        report.rms_i_rm = std::sqrt(std::max(0.0, diff(S_IRM2)));
        report.rms_i_fm = std::sqrt(std::max(0.0, diff(S_IFM2)));
        report.mean_u_m = diff(S_VCM);
        report.mean_i_m = diff(S_IM);
        report.speed_rpm = diff(S_OMEGA) * kRadPerSecToRpm;
        report.p_in = diff(W_IN);
        report.p_out = diff(W_MOTOR);
        report.efficiency = report.p_in > 0.0 ? std::clamp(report.p_out / report.p_in, 0.0, 1.0) : 0.0;
        report.mean_bus_current = diff(Q_SRC);
        report.mean_bus_voltage = diff(S_VBUS);
        report.limiter_engaged = clamped;
        const auto phasors = projector_.result(span);
        report.u_in_fundamental = phasors[0];
        report.i_t_fundamental = phasors[1];
        report.i_rm_fundamental = phasors[2];
        report.audit_worst_final_window = audit_worst;
        report.audit_worst_overall = std::max(report.audit_worst_overall, audit_worst);
        report.pattern_periods = periods_done_;
        report.simulated_time = time();
        report.final_state = to_state(x_, time());

        WindowMetrics m;
        m.values = {report.rms_i_t,  report.rms_i_12, report.rms_i_rm,   report.rms_i_fm,
                    report.mean_u_m, report.mean_i_m, diff(S_OMEGA), report.mean_bus_current};
        return m;
    }

    std::vector<WaveformSample> take_waveform() { return std::move(waveform_); }

private:
    [[nodiscard]] double time() const { return static_cast<double>(steps_done_) * dt_; }

    [[nodiscard]] Vec rk4(const Vec& x, int s, int cond, double h) const {
        const Vec k1 = plant_.rhs(x, s, cond);
        const Vec k2 = plant_.rhs(axpy(x, 0.5 * h, k1), s, cond);
        const Vec k3 = plant_.rhs(axpy(x, 0.5 * h, k2), s, cond);
        const Vec k4 = plant_.rhs(axpy(x, h, k3), s, cond);
        Vec next;
        for (std::size_t k = 0; k < N_STATE; ++k) {
            next[k] = x[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
        return next;
    }

    [[nodiscard]] Vec settled_step(const Vec& x, int s, double h) const {
        const int cond = plant_.conduction(x[I_FM], x[V_CFM], x[V_CM]);
        Vec next = rk4(x, s, cond, h);
        plant_.settle(x, next, cond);
        return next;
    }

    // One step of dt; steps that contain a rectifier or clamp event are
    // redone with event_substeps smaller RK4 steps. Returns true when the
    // source current sat at its limit.
    bool step(int s) {
        const int cond = plant_.conduction(x_[I_FM], x_[V_CFM], x_[V_CM]);
        Vec next = rk4(x_, s, cond, dt_);
        if (config_.event_substeps > 1 && plant_.event_between(x_, next, cond)) {
            const double h = dt_ / static_cast<double>(config_.event_substeps);
            next = x_;
            for (unsigned k = 0; k < config_.event_substeps; ++k) {
                next = settled_step(next, s, h);
            }
        } else {
            plant_.settle(x_, next, cond);
        }

        const double u0 = s * x_[V_BUS];
        const double u1 = s * next[V_BUS];
        projector_.add(dt_, {u0, x_[I_T], x_[I_RM]}, {u1, next[I_T], next[I_RM]});

        bool clamped = false;
        if (plant_.limiter) {
            const double demand = (plant_.e - next[V_BUS]) / plant_.r_src;
            clamped = demand > plant_.i_lim;
        }
        x_ = next;
        ++steps_done_;
        if (config_.waveform_decimation > 0 && steps_done_ % config_.waveform_decimation == 0) {
            waveform_.push_back(WaveformSample{time(), u1, x_[I_T], x_[I_RM], x_[V_CM], x_[I_M],
                                               x_[OMEGA] * kRadPerSecToRpm});
        }
        if (!std::isfinite(x_[I_T]) || !std::isfinite(x_[OMEGA]) || !std::isfinite(x_[V_CM])) {
            throw SolverError("transient state became non-finite");
        }
        return clamped;
    }

    static Vec axpy(const Vec& x, double h, const Vec& d) {
        Vec out;
        for (std::size_t k = 0; k < N_STATE; ++k) {
            out[k] = x[k] + h * d[k];
        }
        return out;
    }

    Plant plant_;
    SimConfig config_;
    std::vector<signed char> table_;
    double dt_;
    double period_;
    Projector projector_;
    Vec x_{};
    std::size_t steps_done_ = 0;
    std::size_t periods_done_ = 0;
    std::size_t periods_per_window_ = 1;
    std::vector<WaveformSample> waveform_;
};

void check_run_inputs(const NetworkDescription& network, const MotorParams& motor, const PfmPattern& pattern,
                      const DcSource& source, const SimConfig& config) {
    check_invariants(network);
    check_motor(motor);
    check_config(config);
    (void)make_pattern(pattern.n1, pattern.n2, pattern.base_frequency, pattern.order);
    if (!(source.voltage_limit >= 0.0) || !std::isfinite(source.voltage_limit)) {
        throw DomainError("source voltage must be finite and >= 0");
    }
    if (config.limiter_enabled && !(source.current_limit > 0.0)) {
        throw DomainError("source current limit must be positive when the limiter is enabled");
    }
}

}  // namespace

void check_motor(const MotorParams& motor) {
    const auto nonneg = [](double v, const char* what) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw DomainError(std::string("motor ") + what + " must be finite and >= 0");
        }
    };
    nonneg(motor.armature_resistance, "armature resistance");
    nonneg(motor.viscous_friction, "viscous friction");
    nonneg(motor.load_torque, "load torque");
    if (!(motor.armature_inductance > 0.0)) {
        throw DomainError("motor armature inductance must be > 0");
    }
    if (!(motor.back_emf_constant > 0.0)) {
        throw DomainError("motor back-EMF constant must be > 0");
    }
    if (!(motor.inertia > 0.0)) {
        throw DomainError("motor inertia must be > 0");
    }
}

void check_config(const SimConfig& config) {
    if (config.steps_per_period < 100 || config.steps_per_period % 2 != 0) {
        throw DomainError("steps per period must be even and >= 100");
    }
    if (!(config.tolerance > 0.0)) {
        throw DomainError("steady-state tolerance must be > 0");
    }
    if (config.max_pattern_periods == 0) {
        throw DomainError("period budget must be >= 1");
    }
    if (!(config.diode_drop >= 0.0)) {
        throw DomainError("diode drop must be >= 0");
    }
    if (!(config.dc_link_capacitance > 0.0) || !(config.bus_capacitance > 0.0) ||
        !(config.source_resistance > 0.0)) {
        throw DomainError("DC-link capacitance, bus capacitance and source resistance must be > 0");
    }
    if (!(config.convergence_window > 0.0) || config.convergence_lag == 0) {
        throw DomainError("convergence window and lag must be > 0");
    }
}

TransientState derivatives(const TransientState& state, double u_in, const NetworkDescription& network,
                           const MotorParams& motor, double diode_drop) {
    check_motor(motor);
    const Plant plant(network, motor, diode_drop, SimConfig{}.dc_link_capacitance, network.source,
                      SimConfig{}.source_resistance, SimConfig{}.bus_capacitance, false);
    Vec d{};
    const Vec x = to_vec(state);
    plant.electrical(x, u_in, plant.conduction(x[I_FM], x[V_CFM], x[V_CM]), d);
    TransientState out = to_state(d, 0.0);
    out.v_bus = 0.0;
    return out;
}

double stored_energy(const TransientState& state, const NetworkDescription& network, const MotorParams& motor,
                     const SimConfig& config) {
    const Plant plant = make_plant(network, motor, config, network.source);
    return plant.stored(to_vec(state));
}

SteadyStateReport run_to_steady_state(const NetworkDescription& network, const MotorParams& motor,
                                      const PfmPattern& pattern, const DcSource& source, const SimConfig& config) {
    check_run_inputs(network, motor, pattern, source, config);
    Simulation sim(network, motor, pattern, source, config);
    SteadyStateReport report;
    std::deque<WindowMetrics> history;
    std::size_t settled = 0;
    while (report.pattern_periods + sim.periods_per_window() <= config.max_pattern_periods) {
        history.push_back(sim.advance_window(report));
        if (history.size() > config.convergence_lag) {
            if (history.back().close_to(history.front(), config.tolerance)) {
                ++settled;
            } else {
                settled = 0;
            }
            history.pop_front();
        }
        // Two consecutive quiet comparisons, so a turning point is not mistaken for a steady state.
        if (settled >= 2) {
            report.converged = true;
            break;
        }
    }
    if (report.pattern_periods == 0) {
        (void)sim.advance_window(report);
    }
    report.waveform = sim.take_waveform();
    return report;
}

SteadyStateReport run_for(const NetworkDescription& network, const MotorParams& motor, const PfmPattern& pattern,
                          const DcSource& source, const SimConfig& config, std::size_t pattern_periods) {
    check_run_inputs(network, motor, pattern, source, config);
    Simulation sim(network, motor, pattern, source, config);
    SteadyStateReport report;
    const std::size_t windows = std::max<std::size_t>(
        1, (pattern_periods + sim.periods_per_window() - 1) / sim.periods_per_window());
    for (std::size_t w = 0; w < windows; ++w) {
        (void)sim.advance_window(report);
    }
    report.converged = false;
    report.waveform = sim.take_waveform();
    return report;
}

OperatingPoint matching_operating_point(const NetworkDescription& network, const SteadyStateReport& report) {
    OperatingPoint op;
    op.frequency = network.nominal_frequency;
    op.drive_rms = std::abs(report.u_in_fundamental);
    const auto& rl = network.motoring_unit().motor.dc_resistance;
    if (rl.is_open() || rl.is_short()) {
        op.motor_load = rl;
    } else if (report.mean_i_m > 0.0 && report.mean_u_m >= 0.0) {
        op.motor_load = LoadResistance::ohms(report.mean_u_m / report.mean_i_m);
    } else {
        op.motor_load = LoadResistance::open();
    }
    return op;
}

CrossEngineDeviation compare_with_phasor(const SteadyStateReport& report, const PhasorSolution& solution) {
    CrossEngineDeviation dev;
    dev.transient_i_t = std::abs(report.i_t_fundamental);
    dev.transient_i_rm = std::abs(report.i_rm_fundamental);
    dev.phasor_i_t = std::abs(solution.i_t);
    dev.phasor_i_rm = std::abs(solution.i_rm());
    const auto rel = [](double a, double b) {
        const double scale = std::max(std::abs(b), std::numeric_limits<double>::min());
        return std::abs(a - b) / scale;
    };
    dev.deviation_i_t = rel(dev.transient_i_t, dev.phasor_i_t);
    dev.deviation_i_rm = rel(dev.transient_i_rm, dev.phasor_i_rm);
    dev.flagged = dev.deviation_i_t > kDeviationFlag || dev.deviation_i_rm > kDeviationFlag;
    return dev;
}

}  // namespace wmd
