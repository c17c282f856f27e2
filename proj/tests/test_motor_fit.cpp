#include "wmd/error.hpp"
#include "wmd/motor_fit.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>

using namespace wmd;
using Catch::Matchers::WithinRel;

TEST_CASE("back-EMF constant and rated torque from the rated point", "[motor]") {
    const MotorFit& fit = table1_motor_fit();
    const double w_rated = 1119.0 * 2.0 * std::numbers::pi / 60.0;
    const double ke = (87.7 - 1.0 * 7.2) / w_rated;
    CHECK_THAT(fit.base.back_emf_constant, WithinRel(ke, 1e-12));
    CHECK_THAT(fit.rated_torque, WithinRel(ke * 7.2 - fit.base.viscous_friction * w_rated, 1e-12));
    CHECK(fit.base.viscous_friction > 0.0);
    CHECK(fit.base.load_torque == 0.0);
    CHECK(fit.medium_torque == kTable1MediumTorque);
    CHECK(fit.medium_torque < fit.rated_torque);
}

TEST_CASE("load cases", "[motor]") {
    const MotorFit& fit = table1_motor_fit();
    CHECK(fit.with_load(LoadCase::no_load).load_torque == 0.0);
    CHECK(fit.with_load(LoadCase::rated).load_torque == fit.rated_torque);
    CHECK(fit.with_load(LoadCase::medium).load_torque == fit.medium_torque);
    CHECK(parse_load_case("no-load") == LoadCase::no_load);
    CHECK(to_string(LoadCase::medium) == "medium");
    CHECK_THROWS_AS(parse_load_case("heavy"), ConfigError);
}

TEST_CASE("quasi-static model reproduces the no-load anchor", "[motor]") {
    const MotorFit& fit = table1_motor_fit();
    const QuasiStaticPoint nl = quasi_static_point(table1_preset(), fit.with_load(LoadCase::no_load), 1.0);
    CHECK_THAT(nl.speed_rpm, WithinRel(1633.0, 1e-6));
    const QuasiStaticPoint rated = quasi_static_point(table1_preset(), fit.with_load(LoadCase::rated), 1.0);
    CHECK(rated.speed_rpm < nl.speed_rpm);
    REQUIRE(fit.residuals.size() == 5);
}

TEST_CASE("stalled motor", "[motor]") {
    MotorParams m = table1_motor_fit().base;
    m.load_torque = 100.0;
    const QuasiStaticPoint p = quasi_static_point(table1_preset(), m, 1.0);
    CHECK(p.speed_rpm == 0.0);
}
