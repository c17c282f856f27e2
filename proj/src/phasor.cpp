#include "wmd/phasor.hpp"

#include "wmd/error.hpp"
#include "wmd/parallel.hpp"
#include "wmd/pfm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wmd {

namespace {

constexpr Complex kJ{0.0, 1.0};
constexpr double kInf = std::numeric_limits<double>::infinity();
// Reciprocal condition estimate below which the mesh matrix is treated as singular.
constexpr double kSingularRcond = 1e-13;

Complex capacitor(double omega, double c) { return 1.0 / (kJ * omega * c); }
Complex inductor(double omega, double l) { return kJ * omega * l; }
// Coupling term of the mesh matrix; negative sign convention throughout.
Complex mutual(double omega, double m) { return -kJ * omega * m; }

struct UnitMeshes {
    int repeater = -1;
    int receiver = -1;
    int load = -1;
};

LoadResistance unit_ac_load(const WmdUnit& unit, bool motoring, const OperatingPoint& op) {
    return equivalent_ac_load(motoring ? op.motor_load : unit.motor.dc_resistance);
}

void check_operating_point(const OperatingPoint& op) {
    if (!(op.frequency > 0.0) || !std::isfinite(op.frequency)) {
        throw DomainError("operating frequency must be positive");
    }
    if (!(op.drive_rms >= 0.0) || !std::isfinite(op.drive_rms)) {
        throw DomainError("drive RMS must be non-negative");
    }
}

void finish_powers(PhasorSolution& sol, const NetworkDescription& network) {
    sol.p_in = sol.drive_rms * sol.i_t.real();
    sol.transmitter_loss = std::norm(sol.i_t) * network.transmitter.coil.ac_resistance;
    sol.p_out = 0.0;
    for (const auto& u : sol.units) {
        sol.p_out += u.output_power;
    }
    sol.efficiency = sol.p_in > 0.0 ? std::clamp(sol.p_out / sol.p_in, 0.0, 1.0) : 0.0;
}

void fill_unit_losses(UnitPhasors& out, const WmdUnit& unit, double r_le) {
    out.repeater_loss =
        std::norm(out.repeater) * (unit.repeater_part1.coil.ac_resistance + unit.repeater_part2.coil.ac_resistance);
    out.receiver_loss = std::norm(out.receiver) * unit.receiver_coil.ac_resistance;
    if (const auto* lcc = std::get_if<LccCompensation>(&unit.receiver_compensation)) {
        out.filter_loss = std::norm(out.load) * lcc->filter_resistance;
    }
    out.output_power = std::isfinite(r_le) ? std::norm(out.load) * r_le : 0.0;
}

}  // namespace

OperatingPoint nominal_operating_point(const NetworkDescription& network) {
    return OperatingPoint{network.nominal_frequency, square_wave_fundamental_rms(network.source.voltage_limit),
                          network.motoring_unit().motor.dc_resistance};
}

double PhasorSolution::total_loss() const {
    double loss = transmitter_loss;
    for (const auto& u : units) {
        loss += u.repeater_loss + u.receiver_loss + u.filter_loss;
    }
    return loss;
}

double PhasorSolution::phase_deg() const { return std::arg(input_impedance) * 180.0 / kPi; }

PhasorSolution solve_full(const NetworkDescription& network, const OperatingPoint& op) {
    check_invariants(network);
    check_operating_point(op);
    const double w = angular_frequency(op.frequency);
    const std::size_t motoring = network.motoring_index();

    // Mesh numbering: 0 = transmitter, then per unit repeater / receiver / load.
    std::vector<UnitMeshes> meshes(network.units.size());
    std::vector<double> ac_loads(network.units.size());
    int n = 1;
    for (std::size_t k = 0; k < network.units.size(); ++k) {
        const auto& unit = network.units[k];
        const LoadResistance load = unit_ac_load(unit, k == motoring, op);
        ac_loads[k] = load.value();
        meshes[k].repeater = n++;
        if (unit.receiver_circuit == ReceiverCircuit::coil_open) {
            continue;
        }
        if (unit.has_lcc()) {
            meshes[k].receiver = n++;
            if (unit.receiver_circuit == ReceiverCircuit::intact && !load.is_open()) {
                meshes[k].load = n++;
            }
        } else if (unit.receiver_circuit == ReceiverCircuit::intact && !load.is_open()) {
            // Series receiver: an open load or broken filter leaves no closed loop.
            meshes[k].receiver = n++;
        }
    }

    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(n, n);
    const auto& tx = network.transmitter;
    z(0, 0) = inductor(w, tx.coil.inductance) + capacitor(w, tx.compensation.capacitance) + tx.coil.ac_resistance;

    for (std::size_t k = 0; k < network.units.size(); ++k) {
        const auto& unit = network.units[k];
        const auto& m = meshes[k];
        const auto& p1 = unit.repeater_part1;
        const auto& p2 = unit.repeater_part2;
        z(m.repeater, m.repeater) = inductor(w, p1.coil.inductance + p2.coil.inductance) +
                                    capacitor(w, p1.compensation.capacitance) +
                                    capacitor(w, p2.compensation.capacitance) + p1.coil.ac_resistance +
                                    p2.coil.ac_resistance;
        z(0, m.repeater) = z(m.repeater, 0) = mutual(w, unit.link_to_transmitter.mutual_inductance);
        if (m.receiver < 0) {
            continue;
        }
        const auto& rx = unit.receiver_coil;
        Complex z_rx = inductor(w, rx.inductance) + rx.ac_resistance;
        if (const auto* lcc = std::get_if<LccCompensation>(&unit.receiver_compensation)) {
            const Complex z_cf = capacitor(w, lcc->filter_capacitance);
            z_rx += capacitor(w, lcc->series_capacitance) + z_cf;
            if (m.load >= 0) {
                z(m.load, m.load) = z_cf + inductor(w, lcc->filter_inductance) + lcc->filter_resistance + ac_loads[k];
                z(m.receiver, m.load) = z(m.load, m.receiver) = -z_cf;
            }
        } else {
            z_rx += capacitor(w, std::get<SeriesCompensation>(unit.receiver_compensation).capacitance) + ac_loads[k];
        }
        z(m.receiver, m.receiver) = z_rx;
        z(m.repeater, m.receiver) = z(m.receiver, m.repeater) =
            mutual(w, unit.link_repeater_to_receiver.mutual_inductance);
    }

    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(z);
    const double rcond = lu.rcond();
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    rhs(0) = 1.0;
    // Per-volt currents; Z_in is a property of the network, independent of U_in.
    const Eigen::VectorXcd per_volt = lu.solve(rhs);
    if (!(rcond > kSingularRcond) || !per_volt.allFinite() || per_volt(0) == Complex{}) {
        throw SolverError("singular mesh matrix at f = " + std::to_string(op.frequency) +
                          " Hz (rcond = " + std::to_string(rcond) + ", " + std::to_string(n) + " meshes)");
    }

    PhasorSolution sol;
    sol.frequency = op.frequency;
    sol.drive_rms = op.drive_rms;
    sol.motoring = motoring;
    sol.input_impedance = 1.0 / per_volt(0);
    sol.i_t = per_volt(0) * op.drive_rms;
    const auto current = [&](int idx) { return idx >= 0 ? per_volt(idx) * op.drive_rms : Complex{}; };
    for (std::size_t k = 0; k < network.units.size(); ++k) {
        const auto& unit = network.units[k];
        UnitPhasors u;
        u.id = unit.id;
        u.repeater = current(meshes[k].repeater);
        u.receiver = current(meshes[k].receiver);
        u.load = unit.has_lcc() ? current(meshes[k].load) : u.receiver;
        fill_unit_losses(u, unit, ac_loads[k]);
        sol.units.push_back(std::move(u));
    }
    finish_powers(sol, network);
    return sol;
}

ReflectedLoads reflected_loads(const NetworkDescription& network, LoadResistance ac_load, double frequency) {
    const WmdUnit& unit = network.motoring_unit();
    const double w = angular_frequency(frequency);
    const double r_rep = unit.repeater_part1.coil.ac_resistance + unit.repeater_part2.coil.ac_resistance;
    const double r_rx = unit.receiver_coil.ac_resistance;
    const double wm2 = w * unit.link_repeater_to_receiver.mutual_inductance;

    const auto into_repeater = [&](double r_lr) { return std::isinf(r_lr) ? r_rep : wm2 * wm2 / r_lr + r_rep; };

    ReflectedLoads out;
    if (unit.receiver_circuit == ReceiverCircuit::coil_open) {
        out.r_lr = out.r_lr_coil_inductance = kInf;
    } else if (const auto* lcc = std::get_if<LccCompensation>(&unit.receiver_compensation)) {
        if (ac_load.is_open() || unit.receiver_circuit == ReceiverCircuit::filter_open) {
            out.r_lr = out.r_lr_coil_inductance = r_rx;
        } else {
            const double branch = ac_load.value() + lcc->filter_resistance;
            const double x_eq = w * equivalent_coil_inductance(unit.receiver_coil.inductance,
                                                               lcc->series_capacitance, frequency);
            const double x_coil = w * unit.receiver_coil.inductance;
            // A shorted, lossless filter branch reflects as an open coil loop.
            out.r_lr = branch > 0.0 ? x_eq * x_eq / branch + r_rx : kInf;
            out.r_lr_coil_inductance = branch > 0.0 ? x_coil * x_coil / branch + r_rx : kInf;
        }
    } else {
        const bool open = ac_load.is_open() || unit.receiver_circuit == ReceiverCircuit::filter_open;
        out.r_lr = out.r_lr_coil_inductance = open ? kInf : ac_load.value() + r_rx;
    }
    out.r_l12 = into_repeater(out.r_lr);
    out.r_l12_coil_inductance = into_repeater(out.r_lr_coil_inductance);
    return out;
}

ReflectedLoads reflected_loads(const NetworkDescription& network, LoadResistance ac_load) {
    return reflected_loads(network, ac_load, network.nominal_frequency);
}

PhasorSolution solve_reduced(const NetworkDescription& network, const OperatingPoint& op) {
    check_invariants(network);
    check_operating_point(op);
    const double w = angular_frequency(op.frequency);
    const std::size_t motoring = network.motoring_index();
    const WmdUnit& unit = network.units[motoring];
    const LoadResistance ac_load = equivalent_ac_load(op.motor_load);
    const ReflectedLoads refl = reflected_loads(network, ac_load, op.frequency);

    const auto& tx = network.transmitter;
    const auto& p1 = unit.repeater_part1;
    const auto& p2 = unit.repeater_part2;
    const Complex z_t = inductor(w, tx.coil.inductance) + capacitor(w, tx.compensation.capacitance) + tx.coil.ac_resistance;
    const Complex z_12 = inductor(w, p1.coil.inductance + p2.coil.inductance) + capacitor(w, p1.compensation.capacitance) +
                         capacitor(w, p2.compensation.capacitance) + refl.r_l12;
    const Complex z_1t = mutual(w, unit.link_to_transmitter.mutual_inductance);
    const Complex z_2r = mutual(w, unit.link_repeater_to_receiver.mutual_inductance);

    const Complex det = z_t * z_12 - z_1t * z_1t;
    if (std::abs(det) <= std::numeric_limits<double>::min() || !std::isfinite(std::abs(det))) {
        throw SolverError("singular reduced system at f = " + std::to_string(op.frequency) + " Hz");
    }

    PhasorSolution sol;
    sol.frequency = op.frequency;
    sol.drive_rms = op.drive_rms;
    sol.motoring = motoring;
    sol.input_impedance = det / z_12;
    sol.i_t = op.drive_rms * z_12 / det;
    const Complex i_12 = -z_1t * sol.i_t / z_12;

    Complex i_rm{};
    Complex i_load{};
    const double r_le = ac_load.value();
    if (std::isfinite(refl.r_lr)) {
        const auto& rx = unit.receiver_coil;
        Complex z_rm = inductor(w, rx.inductance) + refl.r_lr;
        if (const auto* lcc = std::get_if<LccCompensation>(&unit.receiver_compensation)) {
            const Complex z_cf = capacitor(w, lcc->filter_capacitance);
            z_rm += capacitor(w, lcc->series_capacitance) + z_cf;
            i_rm = -z_2r * i_12 / z_rm;
            if (std::isfinite(r_le) && unit.receiver_circuit == ReceiverCircuit::intact) {
                // Current divider between C_fm and the filter branch.
                i_load = i_rm * z_cf / (z_cf + inductor(w, lcc->filter_inductance) + lcc->filter_resistance + r_le);
            }
        } else {
            z_rm += capacitor(w, std::get<SeriesCompensation>(unit.receiver_compensation).capacitance);
            i_rm = -z_2r * i_12 / z_rm;
            i_load = i_rm;
        }
    }

    for (std::size_t k = 0; k < network.units.size(); ++k) {
        UnitPhasors u;
        u.id = network.units[k].id;
        if (k == motoring) {
            u.repeater = i_12;
            u.receiver = i_rm;
            u.load = i_load;
            fill_unit_losses(u, unit, r_le);
        }
        sol.units.push_back(std::move(u));
    }
    finish_powers(sol, network);
    return sol;
}

CurrentRatio current_ratio(const NetworkDescription& network, const PhasorSolution& solution) {
    const double i_rm = std::abs(solution.i_rm());
    if (i_rm == 0.0) {
        throw SolverError("current ratio undefined: receiver current is zero");
    }
    const WmdUnit& unit = network.motoring_unit();
    return CurrentRatio{std::abs(solution.i_t) / i_rm,
                        unit.link_repeater_to_receiver.mutual_inductance / unit.link_to_transmitter.mutual_inductance};
}

PhasorSolution apply_dc_limiter(PhasorSolution solution, const DcSource& source) {
    double scale = 1.0;
    const double i_t = std::abs(solution.i_t);
    if (i_t > source.current_limit) {
        scale = source.current_limit / i_t;
    }
    const double max_drive = square_wave_fundamental_rms(source.voltage_limit);
    if (solution.drive_rms * scale > max_drive) {
        scale = max_drive / solution.drive_rms;
    }
    if (scale >= 1.0) {
        return solution;
    }
    const double s2 = scale * scale;
    solution.drive_rms *= scale;
    solution.i_t *= scale;
    solution.p_in *= s2;
    solution.p_out *= s2;
    solution.transmitter_loss *= s2;
    for (auto& u : solution.units) {
        u.repeater *= scale;
        u.receiver *= scale;
        u.load *= scale;
        u.repeater_loss *= s2;
        u.receiver_loss *= s2;
        u.filter_loss *= s2;
        u.output_power *= s2;
    }
    solution.drive_scale *= scale;
    solution.limiter_engaged = true;
    return solution;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    if (n == 0) {
        throw DomainError("grid needs at least one point");
    }
    std::vector<double> grid(n);
    if (n == 1) {
        grid[0] = lo;
        return grid;
    }
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = lo + step * static_cast<double>(i);
    }
    grid.back() = hi;
    return grid;
}

std::vector<ImpedanceRow> input_impedance_sweep(const NetworkDescription& network, LoadResistance motor_load,
                                                double f_min, double f_max, std::size_t n_points, double drive_rms,
                                                unsigned jobs) {
    if (!(f_min > 0.0) || !(f_min < f_max)) {
        throw DomainError("impedance sweep needs 0 < f_min < f_max");
    }
    if (n_points < 2) {
        throw DomainError("impedance sweep needs at least 2 points");
    }
    check_invariants(network);
    const auto grid = linear_grid(f_min, f_max, n_points);
    std::vector<ImpedanceRow> rows(grid.size());
    parallel_for(grid.size(), jobs, [&](std::size_t i) {
        ImpedanceRow& row = rows[i];
        row.frequency = grid[i];
        try {
            PhasorSolution sol = solve_full(network, OperatingPoint{grid[i], drive_rms, motor_load});
            row.impedance = sol.input_impedance;
            row.magnitude = std::abs(sol.input_impedance);
            row.phase_deg = sol.phase_deg();
            row.solution = std::move(sol);
        } catch (const SolverError& e) {
            row.magnitude = row.phase_deg = std::numeric_limits<double>::quiet_NaN();
            row.error = e.what();
        }
    });
    return rows;
}

std::optional<double> phase_zero_crossing_near(std::span<const ImpedanceRow> rows, double target) {
    std::optional<double> best;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double a = rows[i].phase_deg;
        const double b = rows[i + 1].phase_deg;
        if (!std::isfinite(a) || !std::isfinite(b)) {
            continue;
        }
        // Skip +-180 degree wraps; only genuine crossings through zero count.
        if ((a <= 0.0 && b > 0.0) || (a >= 0.0 && b < 0.0)) {
            if (std::abs(a - b) > 180.0) {
                continue;
            }
            const double fa = rows[i].frequency;
            const double fb = rows[i + 1].frequency;
            const double f = a == b ? fa : fa + (fb - fa) * (0.0 - a) / (b - a);
            if (!best || std::abs(f - target) < std::abs(*best - target)) {
                best = f;
            }
        }
    }
    return best;
}

std::vector<LoadSweepCurve> load_sweep(std::span<const NetworkVariant> variants, double frequency,
                                       std::span<const double> r_le_grid, double drive_rms, unsigned jobs) {
    if (r_le_grid.empty()) {
        throw DomainError("load sweep needs a non-empty R_Le range");
    }
    std::vector<LoadSweepCurve> curves(variants.size());
    const std::size_t per_curve = r_le_grid.size();
    for (std::size_t v = 0; v < variants.size(); ++v) {
        curves[v].name = variants[v].name;
        curves[v].points.resize(per_curve);
    }
    parallel_for(variants.size() * per_curve, jobs, [&](std::size_t idx) {
        const std::size_t v = idx / per_curve;
        const std::size_t i = idx % per_curve;
        const double r_le = r_le_grid[i];
        const OperatingPoint op{frequency, drive_rms, LoadResistance::ohms(dc_load_from_ac(r_le))};
        PhasorSolution sol = solve_full(variants[v].network, op);
        curves[v].points[i] = LoadSweepPoint{r_le, sol.p_out, sol.efficiency, std::move(sol)};
    });
    return curves;
}

SpectrumSolution solve_spectrum(const NetworkDescription& network, LoadResistance motor_load,
                                std::span<const std::pair<double, double>> drive_lines) {
    SpectrumSolution out;
    double it2 = 0.0;
    double irm2 = 0.0;
    for (const auto& [frequency, rms] : drive_lines) {
        PhasorSolution sol = solve_full(network, OperatingPoint{frequency, rms, motor_load});
        it2 += std::norm(sol.i_t);
        irm2 += std::norm(sol.i_rm());
        out.p_in += sol.p_in;
        out.p_out += sol.p_out;
        out.lines.push_back(std::move(sol));
    }
    out.i_t_rms = std::sqrt(it2);
    out.i_rm_rms = std::sqrt(irm2);
    return out;
}

}  // namespace wmd
