#pragma once

#include "wmd/circuit.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wmd {

enum class Dimension { inductance, capacitance, frequency, resistance, voltage, current, time, torque, dimensionless };

[[nodiscard]] const char* unit_symbol(Dimension dim);

/// Parses a literal such as "86.84uH", "40.58nF", "85kHz", "12.18ohm",
/// "110V", "20ms". The unit symbol is mandatory for every dimension except
/// `dimensionless`; an optional SI prefix (p n u µ m k M G) scales it.
/// Throws ConfigError on malformed input, missing or wrong units.
[[nodiscard]] double parse_quantity(std::string_view text, Dimension dim);

/// As parse_quantity for resistance, plus "open" / "inf" for an open circuit.
[[nodiscard]] LoadResistance parse_load(std::string_view text);

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;

    [[nodiscard]] std::vector<double> values() const;
};

/// "lo:hi:n" with unit-suffixed endpoints, e.g. "70kHz:100kHz:121".
[[nodiscard]] GridSpec parse_grid(std::string_view text, Dimension dim);

/// Comma-separated list, e.g. "10ohm,25ohm,50ohm".
[[nodiscard]] std::vector<double> parse_list(std::string_view text, Dimension dim);

}  // namespace wmd
