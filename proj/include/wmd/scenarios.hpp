#pragma once

#include "wmd/circuit.hpp"
#include "wmd/phasor.hpp"
#include "wmd/transient.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wmd {

enum class FaultKind { none, motor_short, motor_open, receiver_open, receiver_short_lfm_open };
enum class Engine { phasor, transient };
enum class Verdict { normal, suppressed, limited };

[[nodiscard]] std::string to_string(FaultKind kind);
[[nodiscard]] std::string to_string(Engine engine);
[[nodiscard]] std::string to_string(Verdict verdict);
/// Throw ConfigError on unknown names.
[[nodiscard]] FaultKind parse_fault_kind(const std::string& text);
[[nodiscard]] Engine parse_engine(const std::string& text);

[[nodiscard]] const std::vector<FaultKind>& all_fault_kinds();

/// Network mutation for a fault on the motoring unit:
///   motor_short              R_L = 0
///   motor_open               R_L = open
///   receiver_open            receiver coil loop broken (receiver and load meshes removed)
///   receiver_short_lfm_open  L_fm branch open (load mesh removed; C_fm closes the coil tank)
[[nodiscard]] NetworkDescription apply_fault(NetworkDescription network, FaultKind kind);

struct ScenarioOptions {
    double suppression_fraction = 0.10;  // "suppressed" when post |I_t| < fraction * pre |I_t|
    // Transient engine only.
    std::optional<MotorParams> motor;    // default: fitted prototype motor at rated load
    PfmPattern pattern;                  // default: duty 1
    SimConfig sim;
    double post_fault_time = 0.02;       // s simulated after the fault
    double pre_fault_tail = 2e-3;        // s of steady pre-fault waveform kept ahead of the fault
};

struct ScenarioResult {
    FaultKind kind = FaultKind::none;
    Engine engine = Engine::phasor;
    double pre_i_t = 0.0;    // RMS magnitudes
    double pre_i_rm = 0.0;
    double post_i_t = 0.0;
    double post_i_rm = 0.0;
    double unclamped_i_t = 0.0;  // phasor engine: |I_t| before the limiter
    bool limiter_engaged = false;
    Verdict verdict = Verdict::normal;
    double suppression_threshold = 0.0;  // A
    std::vector<WaveformSample> waveform;  // transient engine: pre-fault tail plus post-fault trace, fault at t = 0
};

/// Applies the fault to a network running at its nominal operating point
/// and solves with the DC limiter active. The verdict is "limited" when
/// the limiter engaged, "suppressed" when |I_t| fell below the threshold
/// and "normal" otherwise.
[[nodiscard]] ScenarioResult run_fault(const NetworkDescription& network, FaultKind kind, Engine engine,
                                       const ScenarioOptions& options = {});

/// Several faults from one shared pre-fault solution; transient post-fault
/// runs execute in parallel on up to `jobs` threads.
[[nodiscard]] std::vector<ScenarioResult> run_faults(const NetworkDescription& network,
                                                     std::span<const FaultKind> kinds, Engine engine,
                                                     const ScenarioOptions& options = {}, unsigned jobs = 1);

/// Expected verdicts on the prototype preset.
[[nodiscard]] Verdict expected_verdict(FaultKind kind);

// --- figure-style analyses ---------------------------------------------------

struct EfficiencyCurvePoint {
    double r_l = 0.0;  // DC-side load
    double output_power = 0.0;
    double efficiency = 0.0;
    bool limiter_engaged = false;
};

/// Phasor solve for each DC load R_L at the nominal frequency and fixed
/// full-square-wave drive, DC limiter applied; sorted by output power.
[[nodiscard]] std::vector<EfficiencyCurvePoint> efficiency_vs_power(const NetworkDescription& network,
                                                                    std::span<const double> r_l_grid,
                                                                    unsigned jobs = 0);

struct ZpaCurve {
    double r_l = 0.0;
    std::vector<ImpedanceRow> rows;
    std::optional<double> zero_crossing;  // nearest to the nominal frequency
    double phase_at_nominal_deg = 0.0;
};

/// Input impedance vs frequency for each DC load R_L.
[[nodiscard]] std::vector<ZpaCurve> zpa_analysis(const NetworkDescription& network, std::span<const double> r_l_values,
                                                 double f_min, double f_max, std::size_t n_points,
                                                 unsigned jobs = 0);

/// LCC rho = 0.5, LCC rho = 0.25 and series-compensated receivers.
[[nodiscard]] std::vector<NetworkVariant> compensation_variants(const NetworkDescription& network);
/// Both mutual inductances of the motoring unit scaled by each factor.
[[nodiscard]] std::vector<NetworkVariant> coupling_variants(const NetworkDescription& network,
                                                            std::span<const double> scales);

}  // namespace wmd
