#include "wmd/network_io.hpp"

#include "wmd/error.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>
#include <string>

namespace wmd {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kMicro = 1e-6;
constexpr double kNano = 1e-9;
constexpr double kKilo = 1e3;

// Keeps files readable: 86.84e-6 H is written as 86.84, not 86.84000000000001.
double rounded(double value) { return std::stod(fmt::format("{:.12g}", value)); }

class ObjectReader {
public:
    ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) {
            throw ConfigError(where_ + ": expected a JSON object");
        }
    }

    double number(const std::string& key, double scale) {
        const auto it = obj_.find(key);
        if (it == obj_.end()) {
            throw ConfigError(where_ + ": missing key '" + key + "'");
        }
        if (!it->is_number()) {
            throw ConfigError(where_ + ": key '" + key + "' must be a number");
        }
        seen_.insert(key);
        return it->get<double>() * scale;
    }

    std::string text(const std::string& key, const std::string& fallback) {
        const auto it = obj_.find(key);
        if (it == obj_.end()) {
            return fallback;
        }
        if (!it->is_string()) {
            throw ConfigError(where_ + ": key '" + key + "' must be a string");
        }
        seen_.insert(key);
        return it->get<std::string>();
    }

    const json& raw(const std::string& key) {
        const auto it = obj_.find(key);
        if (it == obj_.end()) {
            throw ConfigError(where_ + ": missing key '" + key + "'");
        }
        seen_.insert(key);
        return *it;
    }

    void reject_unknown() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.contains(key)) {
                throw ConfigError(where_ + ": unknown key '" + key + "'");
            }
        }
    }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

ReceiverCircuit receiver_circuit_from(const std::string& text) {
    if (text == "intact") return ReceiverCircuit::intact;
    if (text == "coil_open") return ReceiverCircuit::coil_open;
    if (text == "filter_open") return ReceiverCircuit::filter_open;
    throw ConfigError("unknown receiver_circuit '" + text + "'");
}

WmdUnit unit_from_json(const json& obj, const std::string& tx_label) {
    ObjectReader in(obj, "unit");
    WmdUnit unit;
    unit.id = in.text("id", "");
    if (unit.id.empty()) {
        throw ConfigError("unit: missing or empty 'id'");
    }
    const std::string& s = unit.id;
    unit.repeater_part1.coil = CoilSpec{in.number("L_1" + s + "_uH", kMicro), in.number("R_1" + s + "_ohm", 1.0), "repeater-1" + s};
    unit.repeater_part1.compensation.capacitance = in.number("C_1" + s + "_nF", kNano);
    unit.repeater_part2.coil = CoilSpec{in.number("L_2" + s + "_uH", kMicro), in.number("R_2" + s + "_ohm", 1.0), "repeater-2" + s};
    unit.repeater_part2.compensation.capacitance = in.number("C_2" + s + "_nF", kNano);
    unit.receiver_coil = CoilSpec{in.number("L_r" + s + "_uH", kMicro), in.number("R_r" + s + "_ohm", 1.0), "Rx-" + s};

    const std::string compensation = in.text("compensation", "lcc");
    if (compensation == "lcc") {
        LccCompensation lcc;
        lcc.series_capacitance = in.number("C_r" + s + "_nF", kNano);
        lcc.filter_capacitance = in.number("C_f" + s + "_nF", kNano);
        lcc.filter_inductance = in.number("L_f" + s + "_uH", kMicro);
        lcc.filter_resistance = in.number("R_f" + s + "_ohm", 1.0);
        unit.receiver_compensation = lcc;
    } else if (compensation == "series") {
        unit.receiver_compensation = SeriesCompensation{in.number("C_r" + s + "_nF", kNano)};
    } else {
        throw ConfigError("unit '" + s + "': compensation must be \"lcc\" or \"series\"");
    }

    unit.link_to_transmitter = CouplingLink{in.number("M_1t" + s + "_uH", kMicro), tx_label, unit.repeater_part1.coil.label};
    unit.link_repeater_to_receiver =
        CouplingLink{in.number("M_2r" + s + "_uH", kMicro), unit.repeater_part2.coil.label, unit.receiver_coil.label};

    const json& load = in.raw("R_L_ohm");
    if (load.is_string() && load.get<std::string>() == "open") {
        unit.motor.dc_resistance = LoadResistance::open();
    } else if (load.is_number()) {
        try {
            unit.motor.dc_resistance = LoadResistance::ohms(load.get<double>());
        } catch (const DomainError& e) {
            throw ConfigError(std::string("unit '") + s + "': " + e.what());
        }
    } else {
        throw ConfigError("unit '" + s + "': R_L_ohm must be a number or \"open\"");
    }
    unit.receiver_circuit = receiver_circuit_from(in.text("receiver_circuit", "intact"));
    in.reject_unknown();
    return unit;
}

}  // namespace

const char* to_string(ReceiverCircuit circuit) {
    switch (circuit) {
        case ReceiverCircuit::intact: return "intact";
        case ReceiverCircuit::coil_open: return "coil_open";
        case ReceiverCircuit::filter_open: return "filter_open";
    }
    return "?";
}

ordered_json network_to_json(const NetworkDescription& network) {
    ordered_json doc;
    doc["f_kHz"] = rounded(network.nominal_frequency / kKilo);
    doc["E_V"] = rounded(network.source.voltage_limit);
    doc["I_A"] = rounded(network.source.current_limit);
    const auto& tx = network.transmitter;
    doc["transmitter"] = ordered_json{
        {"label", tx.coil.label},
        {"L_t_uH", rounded(tx.coil.inductance / kMicro)},
        {"R_t_ohm", rounded(tx.coil.ac_resistance)},
        {"C_t_nF", rounded(tx.compensation.capacitance / kNano)},
    };
    ordered_json units = ordered_json::array();
    for (const auto& unit : network.units) {
        const std::string& s = unit.id;
        ordered_json u;
        u["id"] = s;
        u["L_1" + s + "_uH"] = rounded(unit.repeater_part1.coil.inductance / kMicro);
        u["R_1" + s + "_ohm"] = rounded(unit.repeater_part1.coil.ac_resistance);
        u["C_1" + s + "_nF"] = rounded(unit.repeater_part1.compensation.capacitance / kNano);
        u["L_2" + s + "_uH"] = rounded(unit.repeater_part2.coil.inductance / kMicro);
        u["R_2" + s + "_ohm"] = rounded(unit.repeater_part2.coil.ac_resistance);
        u["C_2" + s + "_nF"] = rounded(unit.repeater_part2.compensation.capacitance / kNano);
        u["L_r" + s + "_uH"] = rounded(unit.receiver_coil.inductance / kMicro);
        u["R_r" + s + "_ohm"] = rounded(unit.receiver_coil.ac_resistance);
        if (const auto* lcc = std::get_if<LccCompensation>(&unit.receiver_compensation)) {
            u["compensation"] = "lcc";
            u["C_r" + s + "_nF"] = rounded(lcc->series_capacitance / kNano);
            u["C_f" + s + "_nF"] = rounded(lcc->filter_capacitance / kNano);
            u["L_f" + s + "_uH"] = rounded(lcc->filter_inductance / kMicro);
            u["R_f" + s + "_ohm"] = rounded(lcc->filter_resistance);
        } else {
            u["compensation"] = "series";
            u["C_r" + s + "_nF"] = rounded(std::get<SeriesCompensation>(unit.receiver_compensation).capacitance / kNano);
        }
        u["M_1t" + s + "_uH"] = rounded(unit.link_to_transmitter.mutual_inductance / kMicro);
        u["M_2r" + s + "_uH"] = rounded(unit.link_repeater_to_receiver.mutual_inductance / kMicro);
        if (unit.motor.dc_resistance.is_open()) {
            u["R_L_ohm"] = "open";
        } else {
            u["R_L_ohm"] = rounded(unit.motor.dc_resistance.value());
        }
        if (unit.receiver_circuit != ReceiverCircuit::intact) {
            u["receiver_circuit"] = to_string(unit.receiver_circuit);
        }
        units.push_back(std::move(u));
    }
    doc["units"] = std::move(units);
    return doc;
}

NetworkDescription network_from_json(const json& doc) {
    ObjectReader in(doc, "network");
    NetworkDescription net;
    net.nominal_frequency = in.number("f_kHz", kKilo);
    net.source.voltage_limit = in.number("E_V", 1.0);
    net.source.current_limit = in.number("I_A", 1.0);

    ObjectReader tx(in.raw("transmitter"), "transmitter");
    net.transmitter.coil.label = tx.text("label", "Tx");
    net.transmitter.coil.inductance = tx.number("L_t_uH", kMicro);
    net.transmitter.coil.ac_resistance = tx.number("R_t_ohm", 1.0);
    net.transmitter.compensation.capacitance = tx.number("C_t_nF", kNano);
    tx.reject_unknown();

    const json& units = in.raw("units");
    if (!units.is_array() || units.empty()) {
        throw ConfigError("network: 'units' must be a non-empty array");
    }
    for (const auto& u : units) {
        net.units.push_back(unit_from_json(u, net.transmitter.coil.label));
    }
    in.reject_unknown();

    try {
        check_invariants(net);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("network: ") + e.what());
    }
    return net;
}

NetworkDescription load_network(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) {
        throw ConfigError("cannot open network file '" + path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path.string() + "': " + e.what());
    }
    return network_from_json(doc);
}

void save_network(const NetworkDescription& network, const std::filesystem::path& path) {
    std::ofstream file(path);
    if (!file) {
        throw ConfigError("cannot write network file '" + path.string() + "'");
    }
    file << network_to_json(network).dump(2) << '\n';
}

}  // namespace wmd
