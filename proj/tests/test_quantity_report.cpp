#include "wmd/error.hpp"
#include "wmd/quantity.hpp"
#include "wmd/report.hpp"

#include <json.hpp>

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wmd;
using Catch::Matchers::WithinRel;

TEST_CASE("unit-suffixed literals", "[quantity]") {
    CHECK_THAT(parse_quantity("86.84uH", Dimension::inductance), WithinRel(86.84e-6, 1e-15));
    CHECK_THAT(parse_quantity("40.58nF", Dimension::capacitance), WithinRel(40.58e-9, 1e-15));
    CHECK_THAT(parse_quantity("85kHz", Dimension::frequency), WithinRel(85e3, 1e-15));
    CHECK_THAT(parse_quantity("12.18ohm", Dimension::resistance), WithinRel(12.18, 1e-15));
    CHECK_THAT(parse_quantity("20 mohm", Dimension::resistance), WithinRel(0.02, 1e-15));
    CHECK_THAT(parse_quantity("110V", Dimension::voltage), WithinRel(110.0, 1e-15));
    CHECK_THAT(parse_quantity("7A", Dimension::current), WithinRel(7.0, 1e-15));
    CHECK_THAT(parse_quantity("20ms", Dimension::time), WithinRel(0.02, 1e-15));
    CHECK_THAT(parse_quantity("1e-6H", Dimension::inductance), WithinRel(1e-6, 1e-15));
    CHECK_THAT(parse_quantity("86.84\xC2\xB5H", Dimension::inductance), WithinRel(86.84e-6, 1e-15));
    CHECK(parse_quantity("0.5", Dimension::dimensionless) == 0.5);
}

TEST_CASE("bare numbers and wrong units are rejected", "[quantity]") {
    CHECK_THROWS_AS(parse_quantity("86.84", Dimension::inductance), ConfigError);
    CHECK_THROWS_AS(parse_quantity("12.18", Dimension::resistance), ConfigError);
    CHECK_THROWS_AS(parse_quantity("85kHz", Dimension::inductance), ConfigError);
    CHECK_THROWS_AS(parse_quantity("85xHz", Dimension::frequency), ConfigError);
    CHECK_THROWS_AS(parse_quantity("uH", Dimension::inductance), ConfigError);
    CHECK_THROWS_AS(parse_quantity("", Dimension::inductance), ConfigError);
    CHECK_THROWS_AS(parse_quantity("0.5ohm", Dimension::dimensionless), ConfigError);
}

TEST_CASE("loads and grids", "[quantity]") {
    CHECK(parse_load("open").is_open());
    CHECK(parse_load("0ohm").is_short());
    CHECK_THROWS_AS(parse_load("-1ohm"), ConfigError);
    const GridSpec g = parse_grid("70kHz:100kHz:121", Dimension::frequency);
    CHECK(g.lo == 70e3);
    CHECK(g.hi == 100e3);
    CHECK(g.count == 121);
    CHECK(g.values().size() == 121);
    CHECK_THROWS_AS(parse_grid("70kHz:100kHz", Dimension::frequency), ConfigError);
    CHECK_THROWS_AS(parse_grid("70kHz:100kHz:0", Dimension::frequency), ConfigError);
    CHECK_THROWS_AS(parse_grid("70kHz:100kHz:2.5", Dimension::frequency), ConfigError);
    CHECK_THROWS_AS(parse_grid("100kHz:70kHz:5", Dimension::frequency), ConfigError);
    CHECK_THROWS_AS(parse_grid("70:100:5", Dimension::frequency), ConfigError);
    CHECK(parse_list("10ohm,25ohm,50ohm", Dimension::resistance) == std::vector<double>{10.0, 25.0, 50.0});
}

TEST_CASE("number formatting", "[report]") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333");
    CHECK(format_number(85000.0) == "85000");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1.23456789012e-7) == "1.23456789e-07");
}

TEST_CASE("FNV-1a reference vectors", "[report]") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("run directory contents", "[report]") {
    RunReport r;
    r.command = "demo";
    r.config = "{\"x\":1}";
    r.lines = {"hello"};
    r.checks = {{"one", true, "fine"}, {"two", false, ""}};
    r.artifacts = {{"data.csv", "a,b\n1,2\n"}};
    CHECK_FALSE(r.all_passed());
    CHECK(r.summary() == "wmd demo\nhello\n\nPASS one: fine\nFAIL two\n");

    const auto dir = std::filesystem::temp_directory_path() / "wmd-report-test";
    std::filesystem::remove_all(dir);
    emit_report(r, dir);
    const auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    CHECK(slurp(dir / "data.csv") == "a,b\n1,2\n");
    CHECK(slurp(dir / "summary.txt") == r.summary());
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["config_hash"] == r.config_hash());
    CHECK(manifest["version"] == kVersion);
    CHECK(manifest["artifacts"].size() == 2);
    CHECK(manifest["artifacts"][0]["fnv1a64"] == hex64(fnv1a64("a,b\n1,2\n")));

    RunReport other = r;
    other.config = "{\"x\":2}";
    CHECK(other.config_hash() != r.config_hash());
    std::filesystem::remove_all(dir);
}

TEST_CASE("CSV headers", "[report]") {
    CHECK(waveform_csv({}) == "time_s,u_in_v,i_t_a,i_rm_a,u_m_v,i_m_a,speed_rpm\n");
    CHECK(spectrum_csv({}) == "freq_hz,rms_v\n");
    CHECK(segments_csv(SquareWaveSegmentTrain{}) == "t_start_s,level_v\n");
    CHECK(impedance_sweep_csv({}).rfind("frequency_hz,z_in_ohm,phase_deg,i_t_a", 0) == 0);
    CHECK(load_sweep_csv({}).rfind("variant,r_le_ohm,", 0) == 0);
}
