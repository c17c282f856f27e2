#include "wmd/circuit.hpp"
#include "wmd/error.hpp"
#include "wmd/network_io.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace wmd;
using Catch::Matchers::WithinRel;

namespace {

// 1 / ((2 pi f)^2 L), written out independently of the library.
double series_cap_oracle(double l, double f) {
    const double w = 2.0 * 3.14159265358979323846 * f;
    return 1.0 / (w * w * l);
}

double round_sig(double x, int digits) {
    const double scale = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::abs(x)))));
    return std::round(x * scale) / scale;
}

}  // namespace

TEST_CASE("series capacitor matches the resonance oracle", "[circuit]") {
    CHECK_THAT(design_series_cap(86.84e-6, 85e3), WithinRel(series_cap_oracle(86.84e-6, 85e3), 1e-14));
    CHECK(round_sig(design_series_cap(86.84e-6, 85e3) * 1e9, 4) == 40.37);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> l_dist(1e-6, 1e-3);
    std::uniform_real_distribution<double> f_dist(1e3, 1e6);
    for (int k = 0; k < 200; ++k) {
        const double l = l_dist(rng);
        const double f = f_dist(rng);
        const double c = design_series_cap(l, f);
        CHECK_THAT(resonant_frequency(l, c), WithinRel(f, 1e-12));
    }
}

TEST_CASE("design rejects non-positive inputs", "[circuit]") {
    CHECK_THROWS_AS(design_series_cap(0.0, 85e3), DomainError);
    CHECK_THROWS_AS(design_series_cap(1e-6, -1.0), DomainError);
    CHECK_THROWS_AS(design_lcc(72.3e-6, 85e3, 1.0), DomainError);
    CHECK_THROWS_AS(design_lcc(72.3e-6, 85e3, 0.0), DomainError);
}

TEST_CASE("LCC triplet reproduces the built receiver", "[circuit]") {
    const LccCompensation lcc = design_lcc(72.30e-6, 85e3, 0.5);
    CHECK_THAT(lcc.filter_inductance, WithinRel(36.15e-6, 1e-12));
    CHECK(round_sig(lcc.filter_capacitance * 1e9, 4) == 96.98);
    CHECK(round_sig(lcc.series_capacitance * 1e9, 4) == 96.98);
    // Coil plus C_rm behaves as L_fm.
    CHECK_THAT(equivalent_coil_inductance(72.30e-6, lcc.series_capacitance, 85e3), WithinRel(36.15e-6, 1e-9));
}

TEST_CASE("LCC design identities hold for any ratio", "[circuit][property]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> rho_dist(0.05, 0.95);
    for (int k = 0; k < 100; ++k) {
        const double rho = rho_dist(rng);
        const LccCompensation lcc = design_lcc(72.30e-6, 85e3, rho);
        CHECK_THAT(lcc.filter_inductance, WithinRel(rho * 72.30e-6, 1e-12));
        CHECK_THAT(resonant_frequency(lcc.filter_inductance, lcc.filter_capacitance), WithinRel(85e3, 1e-12));
        CHECK_THAT(equivalent_coil_inductance(72.30e-6, lcc.series_capacitance, 85e3),
                   WithinRel(lcc.filter_inductance, 1e-9));
    }
}

TEST_CASE("rectifier equivalent resistance is 8/pi^2 and invertible", "[circuit][property]") {
    CHECK_THAT(equivalent_ac_load(12.18), WithinRel(8.0 * 12.18 / (3.14159265358979323846 * 3.14159265358979323846), 1e-14));
    for (double r : {0.1, 1.0, 12.18, 50.0, 1e4}) {
        CHECK_THAT(dc_load_from_ac(equivalent_ac_load(r)), WithinRel(r, 1e-14));
    }
    CHECK(equivalent_ac_load(LoadResistance::open()).is_open());
    CHECK(equivalent_ac_load(LoadResistance::short_circuit()).is_short());
}

TEST_CASE("open load is a distinct state", "[circuit]") {
    const LoadResistance open = LoadResistance::open();
    CHECK(open.is_open());
    CHECK_FALSE(open.is_short());
    CHECK(std::isinf(open.value()));
    CHECK_THROWS_AS(LoadResistance::ohms(-1.0), DomainError);
    CHECK_THROWS_AS(LoadResistance::ohms(std::nan("")), DomainError);
    CHECK(LoadResistance::ohms(std::numeric_limits<double>::infinity()).is_open());
    CHECK(LoadResistance::ohms(0.0).is_short());
}

TEST_CASE("prototype preset", "[circuit]") {
    const NetworkDescription net = table1_preset();
    REQUIRE_NOTHROW(check_invariants(net));
    CHECK(net.nominal_frequency == 85e3);
    CHECK(net.source.voltage_limit == 110.0);
    CHECK(net.source.current_limit == 7.0);
    REQUIRE(net.units.size() == 2);
    const WmdUnit& m = net.motoring_unit();
    CHECK_THAT(m.link_to_transmitter.mutual_inductance, WithinRel(13.56e-6, 1e-12));
    CHECK_THAT(m.link_repeater_to_receiver.mutual_inductance, WithinRel(21.44e-6, 1e-12));
    CHECK_THAT(m.motor.dc_resistance.value(), WithinRel(87.7 / 7.2, 1e-12));
    const WmdUnit& idle = net.units[1 - net.motoring_index()];
    CHECK(idle.link_to_transmitter.mutual_inductance == 0.0);
    CHECK_THAT(idle.link_repeater_to_receiver.mutual_inductance, WithinRel(21.44e-6, 1e-12));
}

TEST_CASE("designed capacitors agree with the built ones within 1.5 %", "[circuit]") {
    const NetworkDescription net = table1_preset();
    const double f = net.nominal_frequency;
    const WmdUnit& m = net.motoring_unit();
    const auto& lcc = std::get<LccCompensation>(m.receiver_compensation);
    const auto rel = [](double a, double b) { return std::abs(a - b) / b; };
    CHECK(rel(series_cap_oracle(net.transmitter.coil.inductance, f), net.transmitter.compensation.capacitance) < 0.015);
    CHECK(rel(series_cap_oracle(m.repeater_part1.coil.inductance, f), m.repeater_part1.compensation.capacitance) < 0.015);
    CHECK(rel(series_cap_oracle(m.repeater_part2.coil.inductance, f), m.repeater_part2.compensation.capacitance) < 0.015);
    CHECK(rel(series_cap_oracle(lcc.filter_inductance, f), lcc.filter_capacitance) < 0.015);
    CHECK(rel(series_cap_oracle(m.receiver_coil.inductance - lcc.filter_inductance, f), lcc.series_capacitance) < 0.015);
}

TEST_CASE("invariant violations raise DomainError", "[circuit]") {
    NetworkDescription net = table1_preset();
    SECTION("no motoring unit") {
        net.motoring_unit().link_to_transmitter.mutual_inductance = 0.0;
        CHECK_THROWS_AS(check_invariants(net), DomainError);
    }
    SECTION("two motoring units") {
        net.units[1].link_to_transmitter.mutual_inductance = 1e-6;
        CHECK_THROWS_AS(check_invariants(net), DomainError);
    }
    SECTION("negative inductance") {
        net.transmitter.coil.inductance = -1e-6;
        CHECK_THROWS_AS(check_invariants(net), DomainError);
    }
    SECTION("zero frequency") {
        net.nominal_frequency = 0.0;
        CHECK_THROWS_AS(check_invariants(net), DomainError);
    }
}

TEST_CASE("validate_network reports detuning and impossible couplings", "[circuit]") {
    NetworkDescription net = table1_preset();
    const NetworkDiagnostics diag = validate_network(net);
    CHECK(diag.coupling_violations.empty());
    const TankDetuning& tx = diag.tank("transmitter");
    CHECK_THAT(tx.resonant_frequency, WithinRel(resonant_frequency(86.84e-6, 40.58e-9), 1e-12));
    CHECK(diag.max_detuning() < 0.01);

    net.motoring_unit().link_to_transmitter.mutual_inductance = 100e-6;
    const NetworkDiagnostics bad = validate_network(net);
    REQUIRE(bad.coupling_violations.size() == 1);
    CHECK(bad.coupling_violations[0].coupling_coefficient > 1.0);
}

TEST_CASE("tuned and ideal variants resonate exactly", "[circuit]") {
    const NetworkDescription net = ideal_variant(table1_preset());
    for (const TankDetuning& t : validate_network(net).tanks) {
        CHECK(t.relative_detuning < 1e-12);
    }
    CHECK(net.transmitter.coil.ac_resistance == 0.0);
    CHECK(std::get<LccCompensation>(net.motoring_unit().receiver_compensation).filter_resistance == 0.0);
}

TEST_CASE("variants change only what they name", "[circuit]") {
    const NetworkDescription base = table1_preset();
    const NetworkDescription rho = with_lcc_ratio(base, 0.25);
    CHECK_THAT(std::get<LccCompensation>(rho.motoring_unit().receiver_compensation).filter_inductance,
               WithinRel(0.25 * 72.30e-6, 1e-12));
    CHECK(rho.transmitter.compensation.capacitance == base.transmitter.compensation.capacitance);

    const NetworkDescription series = with_series_receiver(base);
    REQUIRE_FALSE(series.motoring_unit().has_lcc());
    CHECK_THAT(std::get<SeriesCompensation>(series.motoring_unit().receiver_compensation).capacitance,
               WithinRel(series_cap_oracle(72.30e-6, 85e3), 1e-12));

    const NetworkDescription scaled = with_scaled_coupling(base, 1.2, 0.8);
    CHECK_THAT(scaled.motoring_unit().link_to_transmitter.mutual_inductance, WithinRel(1.2 * 13.56e-6, 1e-12));
    CHECK_THAT(scaled.motoring_unit().link_repeater_to_receiver.mutual_inductance, WithinRel(0.8 * 21.44e-6, 1e-12));
}

TEST_CASE("network JSON round trip", "[circuit][io]") {
    const NetworkDescription net = with_motor_load(table1_preset(), LoadResistance::open());
    const auto doc = network_to_json(net);
    CHECK(doc["transmitter"]["L_t_uH"] == 86.84);
    CHECK(doc["transmitter"]["C_t_nF"] == 40.58);
    const NetworkDescription back = network_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(network_to_json(back) == doc);
    CHECK(back.motoring_unit().motor.dc_resistance.is_open());
    CHECK_THAT(back.transmitter.coil.inductance, WithinRel(86.84e-6, 1e-12));
}

TEST_CASE("network JSON errors are ConfigError", "[circuit][io]") {
    auto doc = nlohmann::json::parse(network_to_json(table1_preset()).dump());
    SECTION("unknown key") {
        doc["transmitter"]["L_t_H"] = 1.0;
        CHECK_THROWS_AS(network_from_json(doc), ConfigError);
    }
    SECTION("missing key") {
        doc["transmitter"].erase("C_t_nF");
        CHECK_THROWS_AS(network_from_json(doc), ConfigError);
    }
    SECTION("wrong type") {
        doc["f_kHz"] = "85";
        CHECK_THROWS_AS(network_from_json(doc), ConfigError);
    }
    CHECK_THROWS_AS(load_network("/nonexistent/net.json"), ConfigError);
}
