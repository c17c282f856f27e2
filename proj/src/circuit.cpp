#include "wmd/circuit.hpp"

#include "wmd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wmd {

namespace {

void require_positive(double value, const std::string& what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError(what + " must be positive and finite (got " + std::to_string(value) + ")");
    }
}

void require_non_negative(double value, const std::string& what) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw DomainError(what + " must be non-negative and finite (got " + std::to_string(value) + ")");
    }
}

void check_coil(const CoilSpec& coil, const std::string& where) {
    require_positive(coil.inductance, where + " inductance");
    require_non_negative(coil.ac_resistance, where + " resistance");
}

double series_combination(double c1, double c2) { return c1 * c2 / (c1 + c2); }

}  // namespace

LoadResistance LoadResistance::ohms(double resistance) {
    if (std::isnan(resistance) || resistance < 0.0) {
        throw DomainError("load resistance must be >= 0 (got " + std::to_string(resistance) + ")");
    }
    LoadResistance load;
    if (std::isfinite(resistance)) {
        load.ohms_ = resistance;
    }
    return load;
}

double LoadResistance::value() const {
    return ohms_ ? *ohms_ : std::numeric_limits<double>::infinity();
}

std::size_t NetworkDescription::motoring_index() const {
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (units[i].is_motoring()) {
            return i;
        }
    }
    throw DomainError("network has no motoring unit (every M_1t is zero)");
}

void check_invariants(const NetworkDescription& network) {
    require_positive(network.nominal_frequency, "nominal frequency");
    require_positive(network.source.voltage_limit, "DC voltage limit");
    require_positive(network.source.current_limit, "DC current limit");
    check_coil(network.transmitter.coil, "transmitter");
    require_positive(network.transmitter.compensation.capacitance, "transmitter capacitance");

    int motoring = 0;
    for (const auto& unit : network.units) {
        const std::string tag = "unit '" + unit.id + "' ";
        check_coil(unit.repeater_part1.coil, tag + "repeater part 1");
        check_coil(unit.repeater_part2.coil, tag + "repeater part 2");
        require_positive(unit.repeater_part1.compensation.capacitance, tag + "C_1");
        require_positive(unit.repeater_part2.compensation.capacitance, tag + "C_2");
        check_coil(unit.receiver_coil, tag + "receiver coil");
        if (const auto* lcc = std::get_if<LccCompensation>(&unit.receiver_compensation)) {
            require_positive(lcc->series_capacitance, tag + "C_r");
            require_positive(lcc->filter_capacitance, tag + "C_f");
            require_positive(lcc->filter_inductance, tag + "L_f");
            require_non_negative(lcc->filter_resistance, tag + "R_f");
        } else {
            require_positive(std::get<SeriesCompensation>(unit.receiver_compensation).capacitance,
                             tag + "receiver series capacitance");
        }
        require_non_negative(unit.link_to_transmitter.mutual_inductance, tag + "M_1t");
        require_non_negative(unit.link_repeater_to_receiver.mutual_inductance, tag + "M_2r");
        if (unit.is_motoring()) {
            ++motoring;
        }
    }
    if (motoring != 1) {
        throw DomainError("network must have exactly one motoring unit (found " + std::to_string(motoring) + ")");
    }
}

double resonant_frequency(double inductance, double capacitance) {
    require_positive(inductance, "inductance");
    require_positive(capacitance, "capacitance");
    return 1.0 / (2.0 * kPi * std::sqrt(inductance * capacitance));
}

double design_series_cap(double inductance, double frequency) {
    require_positive(inductance, "inductance");
    require_positive(frequency, "frequency");
    const double omega = angular_frequency(frequency);
    return 1.0 / (omega * omega * inductance);
}

LccCompensation design_lcc(double coil_inductance, double frequency, double filter_ratio,
                           double filter_resistance) {
    require_positive(coil_inductance, "receiver coil inductance");
    require_positive(frequency, "frequency");
    if (!(filter_ratio > 0.0 && filter_ratio < 1.0)) {
        throw DomainError("filter ratio L_fm/L_rm must lie in (0, 1) (got " + std::to_string(filter_ratio) + ")");
    }
    require_non_negative(filter_resistance, "filter resistance");
    LccCompensation lcc;
    lcc.filter_inductance = filter_ratio * coil_inductance;
    lcc.filter_capacitance = design_series_cap(lcc.filter_inductance, frequency);
    lcc.series_capacitance = design_series_cap(coil_inductance - lcc.filter_inductance, frequency);
    lcc.filter_resistance = filter_resistance;
    return lcc;
}

double equivalent_coil_inductance(double coil_inductance, double series_capacitance, double frequency) {
    const double omega = angular_frequency(frequency);
    return coil_inductance - 1.0 / (omega * omega * series_capacitance);
}

double equivalent_ac_load(double dc_resistance) {
    if (std::isnan(dc_resistance) || dc_resistance < 0.0) {
        throw DomainError("DC load resistance must be >= 0 (got " + std::to_string(dc_resistance) + ")");
    }
    return 8.0 * dc_resistance / (kPi * kPi);
}

LoadResistance equivalent_ac_load(LoadResistance dc_resistance) {
    if (dc_resistance.is_open()) {
        return dc_resistance;
    }
    return LoadResistance::ohms(equivalent_ac_load(dc_resistance.value()));
}

double dc_load_from_ac(double ac_resistance) {
    if (std::isnan(ac_resistance) || ac_resistance < 0.0) {
        throw DomainError("AC load resistance must be >= 0");
    }
    return ac_resistance * kPi * kPi / 8.0;
}

NetworkDescription table1_preset() {
    constexpr double uH = 1e-6;
    constexpr double nF = 1e-9;

    NetworkDescription net;
    net.nominal_frequency = 85.0e3;
    net.source = DcSource{110.0, 7.0};
    net.transmitter = CompensatedCoil{CoilSpec{86.84 * uH, 0.085, "Tx"}, SeriesCompensation{40.58 * nF}};

    const auto make_unit = [&](std::string id, double m_1t, double m_2r, LoadResistance load) {
        WmdUnit unit;
        unit.repeater_part1 = CompensatedCoil{CoilSpec{86.22 * uH, 0.085, "repeater-1" + id}, SeriesCompensation{40.68 * nF}};
        unit.repeater_part2 = CompensatedCoil{CoilSpec{86.21 * uH, 0.085, "repeater-2" + id}, SeriesCompensation{40.81 * nF}};
        unit.receiver_coil = CoilSpec{72.30 * uH, 0.08, "Rx-" + id};
        unit.receiver_compensation = LccCompensation{96.98 * nF, 96.98 * nF, 36.15 * uH, 0.02};
        unit.motor = MotorLoadSpec{load};
        unit.link_to_transmitter = CouplingLink{m_1t * uH, "Tx", unit.repeater_part1.coil.label};
        unit.link_repeater_to_receiver = CouplingLink{m_2r * uH, unit.repeater_part2.coil.label, unit.receiver_coil.label};
        unit.id = std::move(id);
        return unit;
    };

    net.units.push_back(make_unit("m", 13.56, 21.44, LoadResistance::ohms(87.7 / 7.2)));
    net.units.push_back(make_unit("i", 0.0, 21.44, LoadResistance::ohms(87.7 / 7.2)));
    return net;
}

double NetworkDiagnostics::max_detuning() const {
    double worst = 0.0;
    for (const auto& t : tanks) {
        worst = std::max(worst, t.relative_detuning);
    }
    return worst;
}

const TankDetuning& NetworkDiagnostics::tank(const std::string& name) const {
    const auto it = std::find_if(tanks.begin(), tanks.end(), [&](const auto& t) { return t.tank == name; });
    if (it == tanks.end()) {
        throw DomainError("no tank named '" + name + "'");
    }
    return *it;
}

NetworkDiagnostics validate_network(const NetworkDescription& network) {
    check_invariants(network);
    const double f0 = network.nominal_frequency;
    NetworkDiagnostics diag;

    const auto add_tank = [&](std::string name, double inductance, double capacitance) {
        const double f = resonant_frequency(inductance, capacitance);
        diag.tanks.push_back(TankDetuning{std::move(name), f, std::abs(f - f0) / f0});
    };
    const auto check_link = [&](const CouplingLink& link, double la, double lb, std::string name) {
        const double k = link.mutual_inductance / std::sqrt(la * lb);
        if (k > 1.0) {
            diag.coupling_violations.push_back(CouplingViolation{std::move(name), k});
        }
    };

    add_tank("transmitter", network.transmitter.coil.inductance, network.transmitter.compensation.capacitance);
    for (const auto& unit : network.units) {
        const std::string sfx = "[" + unit.id + "]";
        add_tank("repeater1" + sfx, unit.repeater_part1.coil.inductance, unit.repeater_part1.compensation.capacitance);
        add_tank("repeater2" + sfx, unit.repeater_part2.coil.inductance, unit.repeater_part2.compensation.capacitance);
        if (const auto* lcc = std::get_if<LccCompensation>(&unit.receiver_compensation)) {
            add_tank("receiver-filter" + sfx, lcc->filter_inductance, lcc->filter_capacitance);
            // Coil loop closes through C_rm and C_fm in series.
            add_tank("receiver-coil" + sfx, unit.receiver_coil.inductance,
                     series_combination(lcc->series_capacitance, lcc->filter_capacitance));
        } else {
            add_tank("receiver" + sfx, unit.receiver_coil.inductance,
                     std::get<SeriesCompensation>(unit.receiver_compensation).capacitance);
        }
        check_link(unit.link_to_transmitter, network.transmitter.coil.inductance,
                   unit.repeater_part1.coil.inductance, "M_1t" + sfx);
        check_link(unit.link_repeater_to_receiver, unit.repeater_part2.coil.inductance,
                   unit.receiver_coil.inductance, "M_2r" + sfx);
    }
    return diag;
}

NetworkDescription with_series_receiver(NetworkDescription network) {
    auto& unit = network.motoring_unit();
    unit.receiver_compensation =
        SeriesCompensation{design_series_cap(unit.receiver_coil.inductance, network.nominal_frequency)};
    return network;
}

NetworkDescription with_lcc_ratio(NetworkDescription network, double filter_ratio) {
    auto& unit = network.motoring_unit();
    double r_f = 0.0;
    if (const auto* lcc = std::get_if<LccCompensation>(&unit.receiver_compensation)) {
        r_f = lcc->filter_resistance;
    }
    unit.receiver_compensation =
        design_lcc(unit.receiver_coil.inductance, network.nominal_frequency, filter_ratio, r_f);
    return network;
}

NetworkDescription with_scaled_coupling(NetworkDescription network, double transmitter_scale,
                                        double receiver_scale) {
    require_positive(transmitter_scale, "transmitter coupling scale");
    require_non_negative(receiver_scale, "receiver coupling scale");
    auto& unit = network.motoring_unit();
    unit.link_to_transmitter.mutual_inductance *= transmitter_scale;
    unit.link_repeater_to_receiver.mutual_inductance *= receiver_scale;
    return network;
}

NetworkDescription with_motor_load(NetworkDescription network, LoadResistance dc_resistance) {
    network.motoring_unit().motor.dc_resistance = dc_resistance;
    return network;
}

NetworkDescription lossless_variant(NetworkDescription network) {
    network.transmitter.coil.ac_resistance = 0.0;
    for (auto& unit : network.units) {
        unit.repeater_part1.coil.ac_resistance = 0.0;
        unit.repeater_part2.coil.ac_resistance = 0.0;
        unit.receiver_coil.ac_resistance = 0.0;
        if (auto* lcc = std::get_if<LccCompensation>(&unit.receiver_compensation)) {
            lcc->filter_resistance = 0.0;
        }
    }
    return network;
}

NetworkDescription tuned_variant(NetworkDescription network) {
    const double f = network.nominal_frequency;
    const auto retune = [f](CompensatedCoil& cc) {
        cc.compensation.capacitance = design_series_cap(cc.coil.inductance, f);
    };
    retune(network.transmitter);
    for (auto& unit : network.units) {
        retune(unit.repeater_part1);
        retune(unit.repeater_part2);
        if (auto* lcc = std::get_if<LccCompensation>(&unit.receiver_compensation)) {
            *lcc = design_lcc(unit.receiver_coil.inductance, f,
                              lcc->filter_inductance / unit.receiver_coil.inductance, lcc->filter_resistance);
        } else {
            std::get<SeriesCompensation>(unit.receiver_compensation).capacitance =
                design_series_cap(unit.receiver_coil.inductance, f);
        }
    }
    return network;
}

NetworkDescription ideal_variant(NetworkDescription network) {
    return lossless_variant(tuned_variant(std::move(network)));
}

}  // namespace wmd
