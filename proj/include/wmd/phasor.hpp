#pragma once

#include "wmd/circuit.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wmd {

using Complex = std::complex<double>;

struct OperatingPoint {
    double frequency = 0.0;  // Hz
    double drive_rms = 0.0;  // U_in, fundamental RMS at phase 0
    LoadResistance motor_load = LoadResistance::open();  // DC-side R_L of the motoring unit
};

/// Nominal frequency, full square-wave drive 2*sqrt(2)*E/pi and the
/// motoring unit's own R_L.
[[nodiscard]] OperatingPoint nominal_operating_point(const NetworkDescription& network);

/// RMS current phasors and dissipation of one WMD unit.
struct UnitPhasors {
    std::string id;
    Complex repeater;  // I_12 = I_1m = I_2m
    Complex receiver;  // I_rm
    Complex load;      // I_fm for LCC receivers, I_rm for series-compensated ones
    double repeater_loss = 0.0;
    double receiver_loss = 0.0;
    double filter_loss = 0.0;
    double output_power = 0.0;
};

struct PhasorSolution {
    double frequency = 0.0;
    double drive_rms = 0.0;
    Complex input_impedance;
    Complex i_t;
    std::vector<UnitPhasors> units;
    std::size_t motoring = 0;
    double p_in = 0.0;
    double p_out = 0.0;
    double transmitter_loss = 0.0;
    double efficiency = 0.0;
    double drive_scale = 1.0;  // < 1 after the DC limiter folded the drive back
    bool limiter_engaged = false;

    [[nodiscard]] const UnitPhasors& motoring_unit() const { return units.at(motoring); }
    [[nodiscard]] Complex i_12() const { return motoring_unit().repeater; }
    [[nodiscard]] Complex i_rm() const { return motoring_unit().receiver; }
    [[nodiscard]] Complex i_fm() const { return motoring_unit().load; }
    [[nodiscard]] double total_loss() const;
    [[nodiscard]] double phase_deg() const;
};

/// Full mesh solve: transmitter loop, one merged loop per hybrid repeater,
/// receiver-coil loop and LCC load loop per unit. Idling units are kept as
/// uncoupled loops. Throws SolverError on a singular mesh matrix.
[[nodiscard]] PhasorSolution solve_full(const NetworkDescription& network, const OperatingPoint& op);

/// Reduced chain: the receiver is folded into the reflected resistance R_Lr
/// and the receiver side of the repeater into R_L12, leaving a 2x2 system
/// for (I_t, I_12). I_rm and I_fm are recovered afterwards. Approximate by
/// construction, so power balance holds only near resonance.
[[nodiscard]] PhasorSolution solve_reduced(const NetworkDescription& network, const OperatingPoint& op);

struct ReflectedLoads {
    double r_lr = 0.0;   // load reflected into the receiver coil loop, using L_rme
    double r_l12 = 0.0;  // receiver reflected into the repeater loop, plus R_1 + R_2
    // Same quantities with the bare coil inductance L_rm in place of L_rme.
    double r_lr_coil_inductance = 0.0;
    double r_l12_coil_inductance = 0.0;
};

/// Reflected resistances of the motoring unit for an AC-side load R_Le.
/// Open loads reflect as R_Lr = R_rm; open receiver coils as R_Lr = +inf.
[[nodiscard]] ReflectedLoads reflected_loads(const NetworkDescription& network, LoadResistance ac_load,
                                             double frequency);
[[nodiscard]] ReflectedLoads reflected_loads(const NetworkDescription& network, LoadResistance ac_load);

struct CurrentRatio {
    double measured = 0.0;   // |I_t| / |I_rm|
    double predicted = 0.0;  // M_2r / M_1t
    [[nodiscard]] double relative_error() const { return std::abs(measured - predicted) / predicted; }
};

/// Throws SolverError when the receiver current is zero.
[[nodiscard]] CurrentRatio current_ratio(const NetworkDescription& network, const PhasorSolution& solution);

/// Folds the drive back so that |I_t| does not exceed the source current
/// limit and U_in does not exceed the square-wave fundamental of E. The
/// network is linear, so every phasor scales with the drive.
[[nodiscard]] PhasorSolution apply_dc_limiter(PhasorSolution solution, const DcSource& source);

// --- sweeps ----------------------------------------------------------------

/// n points from lo to hi inclusive; n == 1 yields {lo}.
[[nodiscard]] std::vector<double> linear_grid(double lo, double hi, std::size_t n);

struct ImpedanceRow {
    double frequency = 0.0;
    Complex impedance;
    double magnitude = 0.0;
    double phase_deg = 0.0;
    std::optional<PhasorSolution> solution;  // empty when the solve failed
    std::string error;
};

/// Input impedance over a linear frequency grid. Solver failures are
/// recorded on their row rather than aborting the sweep.
[[nodiscard]] std::vector<ImpedanceRow> input_impedance_sweep(const NetworkDescription& network,
                                                              LoadResistance motor_load, double f_min,
                                                              double f_max, std::size_t n_points,
                                                              double drive_rms, unsigned jobs = 0);

/// Frequency of the phase zero crossing closest to `target`, linearly
/// interpolated between grid rows. Empty when the phase never changes sign.
[[nodiscard]] std::optional<double> phase_zero_crossing_near(std::span<const ImpedanceRow> rows, double target);

struct NetworkVariant {
    std::string name;
    NetworkDescription network;
};

struct LoadSweepPoint {
    double r_le = 0.0;
    double p_out = 0.0;
    double efficiency = 0.0;
    PhasorSolution solution;
};

struct LoadSweepCurve {
    std::string name;
    std::vector<LoadSweepPoint> points;
};

/// One efficiency curve per variant over AC-side loads R_Le at fixed
/// frequency and drive.
[[nodiscard]] std::vector<LoadSweepCurve> load_sweep(std::span<const NetworkVariant> variants, double frequency,
                                                     std::span<const double> r_le_grid, double drive_rms,
                                                     unsigned jobs = 0);

/// Result of superposing several drive harmonics on the linear network.
struct SpectrumSolution {
    std::vector<PhasorSolution> lines;
    double i_t_rms = 0.0;
    double i_rm_rms = 0.0;
    double p_in = 0.0;
    double p_out = 0.0;
    [[nodiscard]] double efficiency() const { return p_in > 0.0 ? p_out / p_in : 0.0; }
};

/// Solves each (frequency, RMS) drive line separately and combines them;
/// lines at distinct frequencies are orthogonal, so RMS values add in
/// quadrature and powers add directly.
[[nodiscard]] SpectrumSolution solve_spectrum(const NetworkDescription& network, LoadResistance motor_load,
                                              std::span<const std::pair<double, double>> drive_lines);

}  // namespace wmd
