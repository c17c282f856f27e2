// Re-derives the pinned medium load torque with the transient engine.
#include "wmd/circuit.hpp"
#include "wmd/motor_fit.hpp"

#include <cmath>
#include <cstdio>

int main() {
    using namespace wmd;
    const NetworkDescription net = table1_preset();
    const TorqueRefinement r = refine_medium_torque(net, fit_motor(net));
    for (const auto& [torque, speed] : r.trace) {
        std::printf("T_L %.5f N*m -> %.1f rpm\n", torque, speed);
    }
    const bool ok = std::abs(r.torque - kTable1MediumTorque) <= 0.01;
    std::printf("%s refined %.4f N*m, pinned %.4f N*m, speed %.1f rpm\n", ok ? "PASS" : "FAIL", r.torque,
                kTable1MediumTorque, r.speed_rpm);
    return ok ? 0 : 1;
}
