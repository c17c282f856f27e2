#pragma once

#include "wmd/circuit.hpp"
#include "wmd/pfm.hpp"
#include "wmd/phasor.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

namespace wmd {

/// Permanent-magnet brushed DC motor. k_t is taken equal to k_e (SI units).
struct MotorParams {
    double armature_resistance = 1.0;   // R_a, ohm
    double armature_inductance = 2e-3;  // L_a, H
    double back_emf_constant = 0.687;   // k_e, V*s/rad
    double inertia = 1e-4;              // J, kg*m^2
    double viscous_friction = 0.0;      // B, N*m*s/rad
    double load_torque = 0.0;           // T_L, N*m, opposes rotation

    [[nodiscard]] double torque_constant() const { return back_emf_constant; }
};

void check_motor(const MotorParams& motor);

/// Instantaneous state of the motoring unit's drive chain. Idling units are
/// uncoupled from the transmitter and carry no current, so they are not
/// integrated.
struct TransientState {
    double i_t = 0.0;
    double i_12 = 0.0;
    double i_rm = 0.0;
    double i_fm = 0.0;
    double v_ct = 0.0;
    double v_c1m = 0.0;
    double v_c2m = 0.0;
    double v_crm = 0.0;
    double v_cfm = 0.0;
    double v_cm = 0.0;     // DC link, U_m
    double i_m = 0.0;      // armature current
    double omega_m = 0.0;  // rad/s
    double v_bus = 0.0;    // inverter input voltage
    double time = 0.0;
};

struct SimConfig {
    unsigned steps_per_period = 400;  // RK4 steps per base period 1/f; even, >= 100
    std::size_t max_pattern_periods = 200000;
    double tolerance = 1e-4;             // relative change between compared windows for convergence
    double convergence_window = 1e-3;    // s, rounded up to whole pattern periods
    std::size_t convergence_lag = 10;    // a window is compared with the one this many windows earlier
    double diode_drop = 0.0;             // per diode, two conduct at a time
    double dc_link_capacitance = 220e-6; // C_m
    double bus_capacitance = 100e-6;     // inverter input capacitor
    double source_resistance = 0.05;     // output resistance of the DC source in CV mode
    bool limiter_enabled = true;         // source current clamp at DcSource::current_limit
    std::size_t waveform_decimation = 0; // record every n-th step; 0 disables recording
    unsigned event_substeps = 16;        // RK4 sub-steps inside steps holding a switching event; 1 disables
    // Start from this state instead of rest (time restarts at zero). Branches
    // that the network topology removes are forced to zero first.
    std::optional<TransientState> initial_state;
};

void check_config(const SimConfig& config);

/// Time derivatives of the electrical and mechanical states for a given
/// inverter output voltage. The rectifier conducts in the direction of i_fm;
/// at i_fm == 0 it stays blocked unless |v_cfm| exceeds U_m plus the diode
/// drops. v_bus and time are not advanced here (their entries are zero).
/// Throws SolverError when the coupled inductance matrix is not positive definite.
[[nodiscard]] TransientState derivatives(const TransientState& state, double u_in, const NetworkDescription& network,
                                         const MotorParams& motor, double diode_drop = 0.0);

/// Stored energy in every inductor, capacitor and the rotor.
[[nodiscard]] double stored_energy(const TransientState& state, const NetworkDescription& network,
                                   const MotorParams& motor, const SimConfig& config);

struct WaveformSample {
    double time = 0.0;
    double u_in = 0.0;
    double i_t = 0.0;
    double i_rm = 0.0;
    double u_m = 0.0;
    double i_m = 0.0;
    double speed_rpm = 0.0;
};

struct SteadyStateReport {
    bool converged = false;  // false means the run hit its period budget (timeout)
    std::size_t pattern_periods = 0;
    double simulated_time = 0.0;

    double rms_i_t = 0.0;
    double rms_i_12 = 0.0;
    double rms_i_rm = 0.0;
    double rms_i_fm = 0.0;
    double mean_u_m = 0.0;
    double mean_i_m = 0.0;
    double speed_rpm = 0.0;
    double p_in = 0.0;   // inverter output power
    double p_out = 0.0;  // electrical power into the motor terminals
    double efficiency = 0.0;
    double mean_bus_current = 0.0;      // DC source current over the final window
    double mean_bus_voltage = 0.0;
    double peak_period_bus_current = 0.0;  // largest per-pattern-period mean source current in the run
    bool limiter_engaged = false;          // source current clamped during the final window

    // Fundamental (base frequency) RMS phasors over the final window.
    std::complex<double> u_in_fundamental;
    std::complex<double> i_t_fundamental;
    std::complex<double> i_rm_fundamental;

    // Energy audit per pattern period: |E_in - dW - E_dissipated| divided by
    // the gross energy exchanged at the inverter output, integral of |u_in i_t|.
    double audit_worst_final_window = 0.0;
    double audit_worst_overall = 0.0;

    TransientState final_state;
    std::vector<WaveformSample> waveform;
};

/// Fixed-step RK4 from rest until the window-averaged RMS/mean vector and
/// the rotor speed both stop changing, or until the period budget runs out.
/// The motoring unit's network load selects the motor terminal condition:
/// open R_L disconnects the motor, zero R_L shorts the DC link, any finite
/// value connects the motor model.
[[nodiscard]] SteadyStateReport run_to_steady_state(const NetworkDescription& network, const MotorParams& motor,
                                                    const PfmPattern& pattern, const DcSource& source,
                                                    const SimConfig& config = {});

/// Same integration for a fixed number of pattern periods, without the
/// convergence test. The report describes the last window.
[[nodiscard]] SteadyStateReport run_for(const NetworkDescription& network, const MotorParams& motor,
                                        const PfmPattern& pattern, const DcSource& source, const SimConfig& config,
                                        std::size_t pattern_periods);

struct CrossEngineDeviation {
    double transient_i_t = 0.0;
    double phasor_i_t = 0.0;
    double transient_i_rm = 0.0;
    double phasor_i_rm = 0.0;
    double deviation_i_t = 0.0;   // relative
    double deviation_i_rm = 0.0;  // relative
    bool flagged = false;         // either deviation above 5 %
};

/// Operating point the phasor engine should be solved at to mirror a
/// transient run: measured fundamental drive and R_L = U_m / I_m.
[[nodiscard]] OperatingPoint matching_operating_point(const NetworkDescription& network,
                                                      const SteadyStateReport& report);

[[nodiscard]] CrossEngineDeviation compare_with_phasor(const SteadyStateReport& report,
                                                       const PhasorSolution& solution);

}  // namespace wmd
