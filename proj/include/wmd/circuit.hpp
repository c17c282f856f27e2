#pragma once

#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace wmd {

inline constexpr double kPi = std::numbers::pi;

[[nodiscard]] inline double angular_frequency(double frequency) { return 2.0 * kPi * frequency; }

/// Resistive load that can also be an exact open circuit.
///
/// An open circuit is a distinct state rather than a large number, so the
/// engines can drop the corresponding mesh instead of solving an
/// ill-conditioned system.
class LoadResistance {
public:
    /// Finite, non-negative resistance. +inf is accepted and maps to open().
    [[nodiscard]] static LoadResistance ohms(double resistance);
    [[nodiscard]] static LoadResistance open() { return LoadResistance{}; }
    [[nodiscard]] static LoadResistance short_circuit() { return ohms(0.0); }

    [[nodiscard]] bool is_open() const { return !ohms_.has_value(); }
    [[nodiscard]] bool is_short() const { return ohms_.has_value() && *ohms_ == 0.0; }
    /// Resistance in ohms; +inf when open.
    [[nodiscard]] double value() const;

    friend bool operator==(const LoadResistance&, const LoadResistance&) = default;

private:
    LoadResistance() = default;
    std::optional<double> ohms_;
};

struct CoilSpec {
    double inductance = 0.0;     // H
    double ac_resistance = 0.0;  // ohm, taken at the nominal frequency
    std::string label;
};

struct SeriesCompensation {
    double capacitance = 0.0;  // F
};

struct LccCompensation {
    double series_capacitance = 0.0;  // C_rm
    double filter_capacitance = 0.0;  // C_fm
    double filter_inductance = 0.0;   // L_fm
    double filter_resistance = 0.0;   // R_fm
};

using ReceiverCompensation = std::variant<SeriesCompensation, LccCompensation>;

struct CouplingLink {
    double mutual_inductance = 0.0;  // H
    std::string endpoint_a;
    std::string endpoint_b;
};

struct DcSource {
    double voltage_limit = 0.0;  // E, V
    double current_limit = 0.0;  // A
};

struct MotorLoadSpec {
    LoadResistance dc_resistance = LoadResistance::open();  // R_L before the rectifier
};

struct CompensatedCoil {
    CoilSpec coil;
    SeriesCompensation compensation;
};

/// Topology state of the in-pipe receiver. Healthy units are `intact`; the
/// other two states exist so that fault scenarios can be expressed as a
/// plain network mutation.
enum class ReceiverCircuit {
    intact,
    coil_open,    // receiver coil loop broken: no receiver current
    filter_open,  // L_fm branch broken: C_fm terminates the coil tank, no load current
};

/// One pipeline unit: hybrid repeater (two coils wired in one series loop),
/// in-pipe receiver with its compensation, and the motor behind a rectifier.
struct WmdUnit {
    std::string id;
    CompensatedCoil repeater_part1;
    CompensatedCoil repeater_part2;
    CoilSpec receiver_coil;
    ReceiverCompensation receiver_compensation = LccCompensation{};
    MotorLoadSpec motor;
    CouplingLink link_to_transmitter;        // M_1t*
    CouplingLink link_repeater_to_receiver;  // M_2r*
    ReceiverCircuit receiver_circuit = ReceiverCircuit::intact;

    [[nodiscard]] bool is_motoring() const { return link_to_transmitter.mutual_inductance > 0.0; }
    [[nodiscard]] bool has_lcc() const { return std::holds_alternative<LccCompensation>(receiver_compensation); }
};

struct NetworkDescription {
    DcSource source;
    CompensatedCoil transmitter;
    std::vector<WmdUnit> units;
    double nominal_frequency = 0.0;  // Hz

    /// Index of the single unit coupled to the transmitter.
    [[nodiscard]] std::size_t motoring_index() const;
    [[nodiscard]] const WmdUnit& motoring_unit() const { return units.at(motoring_index()); }
    [[nodiscard]] WmdUnit& motoring_unit() { return units.at(motoring_index()); }
};

/// Throws DomainError when a value-level invariant is broken (non-positive
/// L or C, negative R or M, not exactly one motoring unit, ...). Coupling
/// coefficients above one are reported by validate_network() instead.
void check_invariants(const NetworkDescription& network);

// --- compensation design ---------------------------------------------------

[[nodiscard]] double resonant_frequency(double inductance, double capacitance);

/// C = 1 / (omega^2 L).
[[nodiscard]] double design_series_cap(double inductance, double frequency);

/// LCC triplet for a receiver coil: L_fm = rho * L_rm, C_fm resonates with
/// L_fm and C_rm cancels the remainder L_rm - L_fm, so the coil plus C_rm
/// behaves as an inductance equal to L_fm.
[[nodiscard]] LccCompensation design_lcc(double coil_inductance, double frequency,
                                         double filter_ratio = 0.5,
                                         double filter_resistance = 0.0);

/// Residual inductance L_rm - 1/(omega^2 C_rm) of the coil and its series capacitor.
[[nodiscard]] double equivalent_coil_inductance(double coil_inductance, double series_capacitance,
                                                double frequency);

/// Fundamental-harmonic AC resistance seen before a diode bridge: 8 R_L / pi^2.
[[nodiscard]] double equivalent_ac_load(double dc_resistance);
[[nodiscard]] LoadResistance equivalent_ac_load(LoadResistance dc_resistance);
/// Inverse of equivalent_ac_load.
[[nodiscard]] double dc_load_from_ac(double ac_resistance);

/// The built prototype: 85 kHz, 110 V / 7 A source, one motoring unit and
/// one idling unit (uncoupled from the transmitter). Motoring R_L defaults
/// to the rated point 87.7 V / 7.2 A.
[[nodiscard]] NetworkDescription table1_preset();

// --- diagnostics -----------------------------------------------------------

struct TankDetuning {
    std::string tank;
    double resonant_frequency = 0.0;
    double relative_detuning = 0.0;  // |f_tank - f_nominal| / f_nominal
};

struct CouplingViolation {
    std::string link;
    double coupling_coefficient = 0.0;
};

struct NetworkDiagnostics {
    std::vector<TankDetuning> tanks;
    std::vector<CouplingViolation> coupling_violations;

    [[nodiscard]] double max_detuning() const;
    [[nodiscard]] const TankDetuning& tank(const std::string& name) const;
};

[[nodiscard]] NetworkDiagnostics validate_network(const NetworkDescription& network);

// --- network variants --------------------------------------------------------

/// Motoring receiver switched to plain series compensation tuned at f.
[[nodiscard]] NetworkDescription with_series_receiver(NetworkDescription network);
/// Motoring receiver LCC re-designed with L_fm = rho * L_rm (R_fm kept).
[[nodiscard]] NetworkDescription with_lcc_ratio(NetworkDescription network, double filter_ratio);
/// Motoring unit's M_1t and M_2r multiplied by the given factors.
[[nodiscard]] NetworkDescription with_scaled_coupling(NetworkDescription network, double transmitter_scale,
                                                      double receiver_scale);
/// Motoring unit's load replaced.
[[nodiscard]] NetworkDescription with_motor_load(NetworkDescription network, LoadResistance dc_resistance);
/// Every coil and filter resistance set to zero.
[[nodiscard]] NetworkDescription lossless_variant(NetworkDescription network);
/// Every capacitor re-designed so each tank resonates exactly at the nominal frequency.
[[nodiscard]] NetworkDescription tuned_variant(NetworkDescription network);
/// lossless_variant(tuned_variant(network)).
[[nodiscard]] NetworkDescription ideal_variant(NetworkDescription network);

}  // namespace wmd
