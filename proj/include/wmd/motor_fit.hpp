#pragma once

#include "wmd/circuit.hpp"
#include "wmd/transient.hpp"

#include <string>
#include <utility>
#include <vector>

namespace wmd {

/// Measured anchors and the assumed small-motor electrical values.
struct MotorFitTargets {
    double rated_voltage = 87.7;        // U_m at rated load, V
    double rated_current = 7.2;         // I_m at rated load, A
    double rated_speed_rpm = 1119.0;
    double no_load_speed_rpm = 1633.0;  // at duty 1
    double medium_speed_rpm = 1245.0;   // at medium_duty
    double medium_duty = 0.8;
    double armature_resistance = 1.0;
    double armature_inductance = 2e-3;
    double inertia = 1e-4;
};

enum class LoadCase { no_load, medium, rated };

[[nodiscard]] std::string to_string(LoadCase load);
/// Accepts "no-load", "medium", "rated".
[[nodiscard]] LoadCase parse_load_case(const std::string& text);

/// Steady operating point of network + rectifier + motor predicted from the
/// phasor engine: the rectifier is an 8/pi^2 equivalent resistance and the
/// source limiter folds the bus voltage back so that P_in / v_bus <= I_lim.
struct QuasiStaticPoint {
    double speed_rpm = 0.0;
    double u_m = 0.0;
    double i_m = 0.0;
    double r_l = 0.0;
    double drive_scale = 1.0;  // < 1 when the bus current limit is active
    double p_in = 0.0;
    double p_out = 0.0;
};

[[nodiscard]] QuasiStaticPoint quasi_static_point(const NetworkDescription& network, const MotorParams& motor,
                                                  double duty);

struct FitResidual {
    std::string name;
    double target = 0.0;
    double predicted = 0.0;
    [[nodiscard]] double relative() const { return (predicted - target) / target; }
};

struct MotorFit {
    MotorFitTargets targets;
    MotorParams base;  // load_torque = 0
    double rated_torque = 0.0;
    double medium_torque = 0.0;               // used by with_load(LoadCase::medium)
    double medium_torque_quasi_static = 0.0;  // medium torque from the quasi-static model
    std::vector<FitResidual> residuals;

    [[nodiscard]] MotorParams with_load(LoadCase load) const;
};

/// k_e from the rated point, B from the no-load speed at duty 1, rated
/// T_L = k_t * I_rated - B * w_rated, medium T_L from the medium speed at
/// medium_duty. Residuals compare quasi-static predictions with the targets.
[[nodiscard]] MotorFit fit_motor(const NetworkDescription& network, const MotorFitTargets& targets = {});

struct TorqueRefinement {
    double torque = 0.0;
    double speed_rpm = 0.0;
    std::vector<std::pair<double, double>> trace;  // (torque, transient speed) per evaluation
};

/// Medium load torque re-fitted with the transient engine so the steady
/// speed at medium_duty hits medium_speed_rpm within speed_tolerance_rpm.
/// Near the receiver's constant-current limit the speed is very sensitive
/// to torque, so the quasi-static value is only a starting bracket.
[[nodiscard]] TorqueRefinement refine_medium_torque(const NetworkDescription& network, const MotorFit& fit,
                                                    const SimConfig& config = {},
                                                    double speed_tolerance_rpm = 5.0);

/// Transient-refined medium torque for the prototype preset, as produced by
/// refine_medium_torque(table1_preset(), fit_motor(table1_preset())).
inline constexpr double kTable1MediumTorque = 3.363;  // N*m

/// fit_motor(table1_preset()) with medium_torque = kTable1MediumTorque, computed once.
[[nodiscard]] const MotorFit& table1_motor_fit();

}  // namespace wmd
