#include "wmd/quantity.hpp"

#include "wmd/error.hpp"
#include "wmd/phasor.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <utility>

namespace wmd {

namespace {

struct Prefix {
    std::string_view symbol;
    double scale;
};

constexpr std::array<Prefix, 9> kPrefixes{{
    {"p", 1e-12},
    {"n", 1e-9},
    {"u", 1e-6},
    {"\xC2\xB5", 1e-6},  // micro sign
    {"\xCE\xBC", 1e-6},  // greek mu
    {"m", 1e-3},
    {"k", 1e3},
    {"M", 1e6},
    {"G", 1e9},
}};

std::vector<std::string_view> unit_spellings(Dimension dim) {
    switch (dim) {
        case Dimension::inductance:
            return {"H"};
        case Dimension::capacitance:
            return {"F"};
        case Dimension::frequency:
            return {"Hz"};
        case Dimension::resistance:
            return {"ohm", "Ohm", "\xCE\xA9"};
        case Dimension::voltage:
            return {"V"};
        case Dimension::current:
            return {"A"};
        case Dimension::time:
            return {"s"};
        case Dimension::torque:
            return {"Nm", "N*m"};
        case Dimension::dimensionless:
            return {};
    }
    return {};
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    return s;
}

bool ends_with(std::string_view s, std::string_view tail) {
    return s.size() >= tail.size() && s.substr(s.size() - tail.size()) == tail;
}

[[noreturn]] void reject(std::string_view text, Dimension dim, const std::string& why) {
    std::string msg = "bad " + std::string(unit_symbol(dim)) + " literal '" + std::string(text) + "': " + why;
    throw ConfigError(msg);
}

}  // namespace

const char* unit_symbol(Dimension dim) {
    switch (dim) {
        case Dimension::inductance:
            return "H";
        case Dimension::capacitance:
            return "F";
        case Dimension::frequency:
            return "Hz";
        case Dimension::resistance:
            return "ohm";
        case Dimension::voltage:
            return "V";
        case Dimension::current:
            return "A";
        case Dimension::time:
            return "s";
        case Dimension::torque:
            return "Nm";
        case Dimension::dimensionless:
            return "dimensionless";
    }
    return "";
}

double parse_quantity(std::string_view text, Dimension dim) {
    const std::string_view body = trim(text);
    if (body.empty()) {
        reject(text, dim, "empty");
    }
    double number = 0.0;
    const auto [end, ec] = std::from_chars(body.data(), body.data() + body.size(), number);
    if (ec != std::errc{} || end == body.data()) {
        reject(text, dim, "no leading number");
    }
    if (!std::isfinite(number)) {
        reject(text, dim, "not finite");
    }
    std::string_view suffix = trim(std::string_view(end, static_cast<std::size_t>(body.data() + body.size() - end)));

    if (dim == Dimension::dimensionless) {
        if (!suffix.empty()) {
            reject(text, dim, "unexpected unit '" + std::string(suffix) + "'");
        }
        return number;
    }
    if (suffix.empty()) {
        reject(text, dim, std::string("a unit is required, e.g. ") + std::string(body) + unit_symbol(dim));
    }
    for (const std::string_view unit : unit_spellings(dim)) {
        if (!ends_with(suffix, unit)) {
            continue;
        }
        const std::string_view prefix = trim(suffix.substr(0, suffix.size() - unit.size()));
        if (prefix.empty()) {
            return number;
        }
        for (const Prefix& p : kPrefixes) {
            if (prefix == p.symbol) {
                return number * p.scale;
            }
        }
        reject(text, dim, "unknown prefix '" + std::string(prefix) + "'");
    }
    reject(text, dim, std::string("expected unit ") + unit_symbol(dim));
}

LoadResistance parse_load(std::string_view text) {
    const std::string_view t = trim(text);
    if (t == "open" || t == "inf") {
        return LoadResistance::open();
    }
    const double r = parse_quantity(t, Dimension::resistance);
    if (r < 0.0) {
        throw ConfigError("load resistance must be non-negative: '" + std::string(text) + "'");
    }
    return LoadResistance::ohms(r);
}

std::vector<double> GridSpec::values() const { return linear_grid(lo, hi, count); }

GridSpec parse_grid(std::string_view text, Dimension dim) {
    const std::size_t a = text.find(':');
    const std::size_t b = a == std::string_view::npos ? a : text.find(':', a + 1);
    if (b == std::string_view::npos || text.find(':', b + 1) != std::string_view::npos) {
        throw ConfigError("grid '" + std::string(text) + "' must have the form lo:hi:n");
    }
    GridSpec g;
    g.lo = parse_quantity(text.substr(0, a), dim);
    g.hi = parse_quantity(text.substr(a + 1, b - a - 1), dim);
    const double n = parse_quantity(text.substr(b + 1), Dimension::dimensionless);
    if (n < 1.0 || n != std::floor(n) || n > 1e7) {
        throw ConfigError("grid '" + std::string(text) + "': point count must be a positive integer");
    }
    g.count = static_cast<std::size_t>(n);
    if (g.hi < g.lo || (g.count > 1 && g.hi == g.lo)) {
        throw ConfigError("grid '" + std::string(text) + "': need lo < hi");
    }
    return g;
}

std::vector<double> parse_list(std::string_view text, Dimension dim) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        out.push_back(parse_quantity(text.substr(start, comma - start), dim));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

}  // namespace wmd
