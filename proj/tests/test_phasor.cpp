#include "wmd/circuit.hpp"
#include "wmd/error.hpp"
#include "wmd/phasor.hpp"
#include "wmd/pfm.hpp"

#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

#include <complex>
#include <random>

using namespace wmd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

using C = std::complex<double>;

struct Oracle {
    C i_t, i_12, i_rm, i_fm;
    double p_in = 0.0, p_out = 0.0;
};

// Motoring chain written out as four meshes with Cramer-free dense LU:
// transmitter, merged repeater, receiver coil, LCC filter/load.
Oracle mesh_oracle(const NetworkDescription& net, double f, double drive, double r_le) {
    const WmdUnit& u = net.motoring_unit();
    const auto& lcc = std::get<LccCompensation>(u.receiver_compensation);
    const double w = 2.0 * kPi * f;
    const C j(0.0, 1.0);
    const auto zl = [&](double l) { return j * w * l; };
    const auto zc = [&](double c) { return 1.0 / (j * w * c); };

    Eigen::Matrix4cd z = Eigen::Matrix4cd::Zero();
    z(0, 0) = net.transmitter.coil.ac_resistance + zl(net.transmitter.coil.inductance) +
              zc(net.transmitter.compensation.capacitance);
    z(1, 1) = u.repeater_part1.coil.ac_resistance + u.repeater_part2.coil.ac_resistance +
              zl(u.repeater_part1.coil.inductance + u.repeater_part2.coil.inductance) +
              zc(u.repeater_part1.compensation.capacitance) + zc(u.repeater_part2.compensation.capacitance);
    z(2, 2) = u.receiver_coil.ac_resistance + zl(u.receiver_coil.inductance) + zc(lcc.series_capacitance) +
              zc(lcc.filter_capacitance);
    z(3, 3) = zc(lcc.filter_capacitance) + zl(lcc.filter_inductance) + lcc.filter_resistance + r_le;
    z(0, 1) = z(1, 0) = -j * w * u.link_to_transmitter.mutual_inductance;
    z(1, 2) = z(2, 1) = -j * w * u.link_repeater_to_receiver.mutual_inductance;
    z(2, 3) = z(3, 2) = -zc(lcc.filter_capacitance);

    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    v(0) = drive;
    const Eigen::Vector4cd i = z.partialPivLu().solve(v);
    Oracle o{i(0), i(1), i(2), i(3)};
    o.p_in = (C(drive) * std::conj(i(0))).real();
    o.p_out = r_le * std::norm(i(3));
    return o;
}

OperatingPoint op_at(const NetworkDescription& net, double f, double r_l) {
    return OperatingPoint{f, square_wave_fundamental_rms(net.source.voltage_limit), LoadResistance::ohms(r_l)};
}

}  // namespace

TEST_CASE("full solver agrees with an independent mesh oracle", "[phasor]") {
    const NetworkDescription net = table1_preset();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> f_dist(70e3, 100e3);
    std::uniform_real_distribution<double> r_dist(0.5, 200.0);
    for (int k = 0; k < 100; ++k) {
        const double f = f_dist(rng);
        const double r_l = r_dist(rng);
        const OperatingPoint op = op_at(net, f, r_l);
        const PhasorSolution s = solve_full(net, op);
        const Oracle o = mesh_oracle(net, f, op.drive_rms, equivalent_ac_load(r_l));
        CHECK_THAT(std::abs(s.i_t), WithinRel(std::abs(o.i_t), 1e-9));
        CHECK_THAT(std::abs(s.i_12()), WithinRel(std::abs(o.i_12), 1e-9));
        CHECK_THAT(std::abs(s.i_rm()), WithinRel(std::abs(o.i_rm), 1e-9));
        CHECK_THAT(std::abs(s.i_fm()), WithinRel(std::abs(o.i_fm), 1e-9));
        CHECK_THAT(s.p_in, WithinRel(o.p_in, 1e-9));
        CHECK_THAT(s.p_out, WithinRel(o.p_out, 1e-9));
    }
}

TEST_CASE("rated point", "[phasor]") {
    const NetworkDescription net = table1_preset();
    const PhasorSolution s = solve_full(net, nominal_operating_point(net));
    CHECK_THAT(std::abs(s.i_t), WithinAbs(6.85, 0.01));
    CHECK(s.efficiency > 0.9);
    CHECK(s.efficiency < 1.0);
    CHECK_THAT(s.input_impedance.real() * std::norm(s.i_t), WithinRel(s.p_in, 1e-12));
}

TEST_CASE("power balance: input equals losses plus output", "[phasor][property]") {
    const NetworkDescription net = table1_preset();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> f_dist(60e3, 110e3);
    std::uniform_real_distribution<double> r_dist(0.0, 500.0);
    for (int k = 0; k < 200; ++k) {
        const PhasorSolution s = solve_full(net, op_at(net, f_dist(rng), r_dist(rng)));
        CHECK_THAT(s.p_in, WithinRel(s.total_loss() + s.p_out, 1e-9));
        CHECK(s.efficiency >= 0.0);
        CHECK(s.efficiency <= 1.0);
    }
}

TEST_CASE("currents scale linearly with the drive", "[phasor][property]") {
    const NetworkDescription net = table1_preset();
    OperatingPoint op = op_at(net, 85e3, 20.0);
    const PhasorSolution a = solve_full(net, op);
    op.drive_rms *= 2.5;
    const PhasorSolution b = solve_full(net, op);
    CHECK_THAT(std::abs(b.i_t), WithinRel(2.5 * std::abs(a.i_t), 1e-12));
    CHECK_THAT(std::abs(b.i_fm()), WithinRel(2.5 * std::abs(a.i_fm()), 1e-12));
    CHECK_THAT(b.p_out, WithinRel(6.25 * a.p_out, 1e-12));
}

TEST_CASE("idling units carry no current", "[phasor][property]") {
    const NetworkDescription net = table1_preset();
    for (double r : {0.0, 1.0, 12.18, 100.0}) {
        const PhasorSolution s = solve_full(net, op_at(net, 85e3, r));
        for (std::size_t k = 0; k < s.units.size(); ++k) {
            if (k == s.motoring) {
                continue;
            }
            CHECK(std::abs(s.units[k].repeater) <= 1e-12 * std::abs(s.i_t));
            CHECK(std::abs(s.units[k].receiver) <= 1e-12 * std::abs(s.i_t));
        }
    }
}

TEST_CASE("current ratio equals M_2r / M_1t on the ideal network", "[phasor]") {
    const NetworkDescription ideal = ideal_variant(table1_preset());
    for (double r : {2.0, 12.18, 40.0}) {
        const PhasorSolution s = solve_full(ideal, op_at(ideal, 85e3, r));
        const CurrentRatio cr = current_ratio(ideal, s);
        CHECK_THAT(cr.predicted, WithinRel(21.44 / 13.56, 1e-12));
        CHECK(cr.relative_error() < 1e-6);
    }
    const NetworkDescription lossy = table1_preset();
    const CurrentRatio rated = current_ratio(lossy, solve_full(lossy, nominal_operating_point(lossy)));
    CHECK(rated.relative_error() < 0.06);
}

TEST_CASE("ideal LCC delivers load-independent output current", "[phasor][property]") {
    const NetworkDescription ideal = ideal_variant(table1_preset());
    const double i0 = std::abs(solve_full(ideal, op_at(ideal, 85e3, 5.0)).i_fm());
    for (double r : {1.0, 10.0, 30.0, 80.0}) {
        CHECK_THAT(std::abs(solve_full(ideal, op_at(ideal, 85e3, r)).i_fm()), WithinRel(i0, 1e-9));
    }
}

TEST_CASE("reflected loads match the closed forms", "[phasor]") {
    const NetworkDescription ideal = ideal_variant(table1_preset());
    const double w = 2.0 * kPi * 85e3;
    const double r_le = 9.87;
    const ReflectedLoads r = reflected_loads(ideal, LoadResistance::ohms(r_le));
    CHECK_THAT(r.r_lr, WithinRel(std::pow(w * 36.15e-6, 2) / r_le, 1e-9));
    CHECK_THAT(r.r_l12, WithinRel(std::pow(w * 21.44e-6, 2) / r.r_lr, 1e-9));
    CHECK_THAT(r.r_lr_coil_inductance, WithinRel(std::pow(w * 72.30e-6, 2) / r_le, 1e-9));
}

TEST_CASE("reduced solver tracks the full solver", "[phasor]") {
    const NetworkDescription net = table1_preset();
    for (double r_le = 1.0; r_le <= 100.0; r_le += 3.0) {
        OperatingPoint op = op_at(net, 85e3, 1.0);
        op.motor_load = LoadResistance::ohms(dc_load_from_ac(r_le));
        const PhasorSolution full = solve_full(net, op);
        const PhasorSolution red = solve_reduced(net, op);
        CHECK(std::abs(std::abs(red.i_t) / std::abs(full.i_t) - 1.0) < 0.005);
        CHECK(std::abs(std::abs(red.i_12()) / std::abs(full.i_12()) - 1.0) < 0.005);
        CHECK(std::abs(std::abs(red.i_rm()) / std::abs(full.i_rm()) - 1.0) < 0.005);
    }
}

TEST_CASE("open and shorted loads are exact", "[phasor]") {
    const NetworkDescription net = table1_preset();
    OperatingPoint op = nominal_operating_point(net);
    op.motor_load = LoadResistance::open();
    const PhasorSolution open = solve_full(net, op);
    CHECK(std::abs(open.i_fm()) == 0.0);
    CHECK(open.p_out == 0.0);
    CHECK(std::abs(open.i_t) > 100.0);
    op.motor_load = LoadResistance::short_circuit();
    const PhasorSolution shorted = solve_full(net, op);
    CHECK(shorted.p_out == 0.0);
    CHECK(std::abs(shorted.i_t) < 1.0);
}

TEST_CASE("DC limiter folds the drive back", "[phasor][property]") {
    const NetworkDescription net = table1_preset();
    for (double r : {0.0, 2.0, 12.18, 40.0, 200.0, 1e4}) {
        const PhasorSolution raw = solve_full(net, op_at(net, 85e3, r));
        const PhasorSolution lim = apply_dc_limiter(raw, net.source);
        CHECK(std::abs(lim.i_t) <= 7.0 * (1.0 + 1e-12));
        if (std::abs(raw.i_t) <= 7.0) {
            CHECK_FALSE(lim.limiter_engaged);
            CHECK(std::abs(lim.i_t) == std::abs(raw.i_t));
        } else {
            CHECK(lim.limiter_engaged);
            CHECK_THAT(std::abs(lim.i_t), WithinRel(7.0, 1e-12));
            CHECK_THAT(lim.efficiency, WithinRel(raw.efficiency, 1e-12));
        }
    }
}

TEST_CASE("impedance sweep grid contract and determinism", "[phasor]") {
    const NetworkDescription net = table1_preset();
    const double drive = square_wave_fundamental_rms(110.0);
    const auto one = input_impedance_sweep(net, LoadResistance::ohms(25.0), 70e3, 100e3, 121, drive, 1);
    const auto many = input_impedance_sweep(net, LoadResistance::ohms(25.0), 70e3, 100e3, 121, drive, 4);
    REQUIRE(one.size() == 121);
    CHECK(one.front().frequency == 70e3);
    CHECK(one.back().frequency == 100e3);
    for (std::size_t k = 0; k < one.size(); ++k) {
        CHECK(one[k].impedance == many[k].impedance);
    }
    CHECK(linear_grid(1.0, 2.0, 1) == std::vector<double>{1.0});
    CHECK_THROWS_AS(input_impedance_sweep(net, LoadResistance::ohms(25.0), 100e3, 70e3, 10, drive), DomainError);
}

TEST_CASE("zero crossing interpolation", "[phasor]") {
    std::vector<ImpedanceRow> rows(4);
    const double f[] = {80.0, 82.0, 84.0, 86.0};
    const double ph[] = {-3.0, -1.0, 1.0, 3.0};
    for (int k = 0; k < 4; ++k) {
        rows[k].frequency = f[k];
        rows[k].phase_deg = ph[k];
        rows[k].solution = PhasorSolution{};
    }
    CHECK_THAT(*phase_zero_crossing_near(rows, 85.0), WithinRel(83.0, 1e-12));
    for (auto& r : rows) {
        r.phase_deg = std::abs(r.phase_deg);
    }
    CHECK_FALSE(phase_zero_crossing_near(rows, 85.0).has_value());
}

TEST_CASE("spectrum superposition adds powers", "[phasor]") {
    const NetworkDescription net = table1_preset();
    const LoadResistance rl = LoadResistance::ohms(12.18);
    const std::vector<std::pair<double, double>> lines{{85e3, 90.0}, {255e3, 30.0}};
    const SpectrumSolution s = solve_spectrum(net, rl, lines);
    const PhasorSolution a = solve_full(net, OperatingPoint{85e3, 90.0, rl});
    const PhasorSolution b = solve_full(net, OperatingPoint{255e3, 30.0, rl});
    CHECK_THAT(s.p_out, WithinRel(a.p_out + b.p_out, 1e-12));
    CHECK_THAT(s.i_t_rms, WithinRel(std::hypot(std::abs(a.i_t), std::abs(b.i_t)), 1e-12));
}

TEST_CASE("invalid operating points are rejected", "[phasor]") {
    const NetworkDescription net = table1_preset();
    CHECK_THROWS_AS(solve_full(net, OperatingPoint{0.0, 10.0, LoadResistance::ohms(1.0)}), DomainError);
    CHECK_THROWS_AS(solve_full(net, OperatingPoint{85e3, -1.0, LoadResistance::ohms(1.0)}), DomainError);
}
