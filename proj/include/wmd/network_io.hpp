#pragma once

#include "wmd/circuit.hpp"

#include <filesystem>

#include <json.hpp>

namespace wmd {

// Network descriptions on disk use the prototype's parameter symbols with
// the unit in the key, e.g. "L_t_uH", "C_1m_nF", "M_1tm_uH", "R_L_ohm".
// Per-unit keys carry the unit id as subscript suffix ("m", "i", ...).
// Values are converted to SI on load.

[[nodiscard]] nlohmann::ordered_json network_to_json(const NetworkDescription& network);
[[nodiscard]] NetworkDescription network_from_json(const nlohmann::json& doc);

[[nodiscard]] NetworkDescription load_network(const std::filesystem::path& path);
void save_network(const NetworkDescription& network, const std::filesystem::path& path);

[[nodiscard]] const char* to_string(ReceiverCircuit circuit);

}  // namespace wmd
