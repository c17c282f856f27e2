#pragma once

#include "wmd/pfm.hpp"
#include "wmd/phasor.hpp"
#include "wmd/scenarios.hpp"
#include "wmd/transient.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wmd {

inline constexpr const char* kVersion = "0.1.0";

/// Fixed 9-significant-digit rendering used by every CSV.
[[nodiscard]] std::string format_number(double value);

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes);
[[nodiscard]] std::string hex64(std::uint64_t value);

// --- CSV tables ------------------------------------------------------------

[[nodiscard]] std::string impedance_sweep_csv(const std::vector<ImpedanceRow>& rows);
[[nodiscard]] std::string load_sweep_csv(const std::vector<LoadSweepCurve>& curves);
[[nodiscard]] std::string solution_csv(const PhasorSolution& solution);
[[nodiscard]] std::string efficiency_curve_csv(const std::vector<EfficiencyCurvePoint>& points);
[[nodiscard]] std::string zpa_csv(const std::vector<ZpaCurve>& curves);
[[nodiscard]] std::string fault_csv(const std::vector<ScenarioResult>& results);
[[nodiscard]] std::string waveform_csv(const std::vector<WaveformSample>& samples);
[[nodiscard]] std::string segments_csv(const SquareWaveSegmentTrain& train);
[[nodiscard]] std::string spectrum_csv(const std::vector<SpectralLine>& lines);

// --- run directory ---------------------------------------------------------

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct Artifact {
    std::string name;  // file name inside the run directory
    std::string content;
};

struct RunReport {
    std::string command;
    std::string config;            // canonical configuration text; hashed into the manifest
    std::vector<std::string> lines;  // free-form summary lines
    std::vector<Check> checks;
    std::vector<Artifact> artifacts;

    [[nodiscard]] bool all_passed() const;
    [[nodiscard]] std::string config_hash() const;
    [[nodiscard]] std::string summary() const;
    [[nodiscard]] std::string manifest() const;
};

/// Writes every artifact, summary.txt and manifest.json into `destination`
/// (created if needed). Output is a pure function of the report contents.
/// Throws std::filesystem::filesystem_error when the directory is not writable.
void emit_report(const RunReport& report, const std::filesystem::path& destination);

}  // namespace wmd
