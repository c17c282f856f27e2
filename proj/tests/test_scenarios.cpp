#include "wmd/error.hpp"
#include "wmd/phasor.hpp"
#include "wmd/report.hpp"
#include "wmd/scenarios.hpp"

#include <catch_amalgamated.hpp>

using namespace wmd;
using Catch::Matchers::WithinRel;

TEST_CASE("fault mutations", "[scenarios]") {
    const NetworkDescription net = table1_preset();
    CHECK(apply_fault(net, FaultKind::motor_short).motoring_unit().motor.dc_resistance.is_short());
    CHECK(apply_fault(net, FaultKind::motor_open).motoring_unit().motor.dc_resistance.is_open());
    CHECK(apply_fault(net, FaultKind::receiver_open).motoring_unit().receiver_circuit == ReceiverCircuit::coil_open);
    CHECK(apply_fault(net, FaultKind::receiver_short_lfm_open).motoring_unit().receiver_circuit ==
          ReceiverCircuit::filter_open);
    const NetworkDescription same = apply_fault(net, FaultKind::none);
    CHECK(same.motoring_unit().motor.dc_resistance == net.motoring_unit().motor.dc_resistance);
}

TEST_CASE("phasor verdict table", "[scenarios]") {
    const NetworkDescription net = table1_preset();
    const PhasorSolution plain = solve_full(net, nominal_operating_point(net));
    for (const FaultKind kind : all_fault_kinds()) {
        const ScenarioResult r = run_fault(net, kind, Engine::phasor);
        CHECK(r.verdict == expected_verdict(kind));
        CHECK(r.post_i_t <= 7.0 * (1.0 + 1e-6));
        CHECK_THAT(r.pre_i_t, WithinRel(std::abs(plain.i_t), 1e-12));
    }
    const ScenarioResult none = run_fault(net, FaultKind::none, Engine::phasor);
    CHECK(none.post_i_t == none.pre_i_t);
    CHECK(none.post_i_rm == none.pre_i_rm);

    const ScenarioResult shorted = run_fault(net, FaultKind::motor_short, Engine::phasor);
    CHECK(shorted.post_i_t < 0.1 * shorted.pre_i_t);
    CHECK_FALSE(shorted.limiter_engaged);

    const ScenarioResult open = run_fault(net, FaultKind::motor_open, Engine::phasor);
    CHECK(open.limiter_engaged);
    CHECK_THAT(open.post_i_t, WithinRel(7.0, 1e-9));
    CHECK(open.unclamped_i_t > 100.0);
}

TEST_CASE("motor short current matches the reflected-load oracle", "[scenarios]") {
    // With R_Le = 0 the LCC branch reflects as an open coil loop, so the
    // repeater only sees its own resistance and detuning.
    const NetworkDescription net = table1_preset();
    const ScenarioResult shorted = run_fault(net, FaultKind::motor_short, Engine::phasor);
    const ScenarioResult coil_open = run_fault(net, FaultKind::receiver_open, Engine::phasor);
    CHECK(shorted.post_i_t < 0.5);
    CHECK(coil_open.post_i_t < 0.5);
}

TEST_CASE("suppression fraction is validated", "[scenarios]") {
    ScenarioOptions o;
    o.suppression_fraction = 0.0;
    CHECK_THROWS_AS(run_fault(table1_preset(), FaultKind::none, Engine::phasor, o), DomainError);
    o.suppression_fraction = 1.0;
    CHECK_THROWS_AS(run_fault(table1_preset(), FaultKind::none, Engine::phasor, o), DomainError);
}

TEST_CASE("efficiency curve", "[scenarios]") {
    const NetworkDescription net = table1_preset();
    const std::vector<double> one{12.18};
    const auto single = efficiency_vs_power(net, one);
    REQUIRE(single.size() == 1);
    CHECK(single[0].r_l == 12.18);

    const std::vector<double> grid = linear_grid(2.0, 2000.0, 300);
    const auto curve = efficiency_vs_power(net, grid, 4);
    REQUIRE(curve.size() == grid.size());
    for (std::size_t k = 0; k < curve.size(); ++k) {
        CHECK(curve[k].output_power >= 0.0);
        CHECK(curve[k].efficiency >= 0.0);
        CHECK(curve[k].efficiency <= 1.0);
        if (k > 0) {
            CHECK(curve[k].output_power >= curve[k - 1].output_power);
        }
    }
    // Very large R_L: tiny output, efficiency drops.
    const std::vector<double> far{200.0, 2000.0, 20000.0};
    const auto tail = efficiency_vs_power(net, far);
    CHECK(tail[0].efficiency < tail[1].efficiency);
    CHECK(tail[1].efficiency < tail[2].efficiency);
    CHECK(tail[0].r_l == 20000.0);

    const std::vector<double> none;
    CHECK_THROWS_AS(efficiency_vs_power(net, none), DomainError);
}

TEST_CASE("scenario outputs are byte-identical across runs", "[scenarios][property]") {
    const NetworkDescription net = table1_preset();
    std::vector<ScenarioResult> a;
    std::vector<ScenarioResult> b;
    for (const FaultKind kind : all_fault_kinds()) {
        a.push_back(run_fault(net, kind, Engine::phasor));
        b.push_back(run_fault(net, kind, Engine::phasor));
    }
    CHECK(fault_csv(a) == fault_csv(b));
    const std::vector<double> grid = linear_grid(5.0, 100.0, 50);
    CHECK(efficiency_curve_csv(efficiency_vs_power(net, grid, 1)) ==
          efficiency_curve_csv(efficiency_vs_power(net, grid, 8)));
}

TEST_CASE("zpa analysis", "[scenarios]") {
    const NetworkDescription net = table1_preset();
    const std::vector<double> loads{25.0};
    const auto curves = zpa_analysis(net, loads, 80e3, 90e3, 201);
    REQUIRE(curves.size() == 1);
    CHECK(curves[0].rows.size() == 201);
    REQUIRE(curves[0].zero_crossing.has_value());
    CHECK(std::abs(*curves[0].zero_crossing - 85e3) < 500.0);
    CHECK(std::abs(curves[0].phase_at_nominal_deg) < 2.0);
}

TEST_CASE("variant families", "[scenarios]") {
    const NetworkDescription net = table1_preset();
    const auto comp = compensation_variants(net);
    REQUIRE(comp.size() == 3);
    CHECK(comp[0].name == "lcc-rho0.5");
    CHECK_FALSE(comp[2].network.motoring_unit().has_lcc());
    const std::vector<double> scales{0.8, 1.2};
    const auto coup = coupling_variants(net, scales);
    REQUIRE(coup.size() == 2);
    CHECK_THAT(coup[1].network.motoring_unit().link_to_transmitter.mutual_inductance,
               WithinRel(1.2 * 13.56e-6, 1e-12));
}

TEST_CASE("names round trip", "[scenarios]") {
    for (const FaultKind k : all_fault_kinds()) {
        CHECK(parse_fault_kind(to_string(k)) == k);
    }
    CHECK(parse_engine("transient") == Engine::transient);
    CHECK_THROWS_AS(parse_fault_kind("meltdown"), ConfigError);
    CHECK_THROWS_AS(parse_engine("spice"), ConfigError);
}
