#include "wmd/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <json.hpp>

namespace wmd {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::filesystem::filesystem_error("cannot open for writing", path,
                                                std::make_error_code(std::errc::permission_denied));
    }
    out << content;
    if (!out) {
        throw std::filesystem::filesystem_error("write failed", path, std::make_error_code(std::errc::io_error));
    }
}

std::string row(std::initializer_list<std::string> cells) {
    std::string out;
    for (const std::string& c : cells) {
        if (!out.empty()) {
            out += ',';
        }
        out += c;
    }
    out += '\n';
    return out;
}

std::string n(double v) { return format_number(v); }
std::string flag(bool b) { return b ? "1" : "0"; }

constexpr const char* kSolutionHeader =
    "z_in_ohm,phase_deg,i_t_a,i_12_a,i_rm_a,i_fm_a,p_in_w,p_out_w,efficiency,limiter_engaged";

std::string solution_cells(const PhasorSolution& s) {
    return n(std::abs(s.input_impedance)) + ',' + n(s.phase_deg()) + ',' + n(std::abs(s.i_t)) + ',' +
           n(std::abs(s.i_12())) + ',' + n(std::abs(s.i_rm())) + ',' + n(std::abs(s.i_fm())) + ',' + n(s.p_in) +
           ',' + n(s.p_out) + ',' + n(s.efficiency) + ',' + flag(s.limiter_engaged);
}

}  // namespace

std::string format_number(double value) {
    if (value == 0.0) {
        return "0";  // folds -0
    }
    return fmt::format("{:.9g}", value);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

std::string impedance_sweep_csv(const std::vector<ImpedanceRow>& rows) {
    std::string out = std::string("frequency_hz,") + kSolutionHeader + ",error\n";
    for (const ImpedanceRow& r : rows) {
        if (r.solution) {
            out += n(r.frequency) + ',' + solution_cells(*r.solution) + ",\n";
        } else {
            out += n(r.frequency) + ",,,,,,,,,,," + r.error + '\n';
        }
    }
    return out;
}

std::string load_sweep_csv(const std::vector<LoadSweepCurve>& curves) {
    std::string out = std::string("variant,r_le_ohm,") + kSolutionHeader + '\n';
    for (const LoadSweepCurve& c : curves) {
        for (const LoadSweepPoint& p : c.points) {
            out += c.name + ',' + n(p.r_le) + ',' + solution_cells(p.solution) + '\n';
        }
    }
    return out;
}

std::string solution_csv(const PhasorSolution& s) {
    return std::string("frequency_hz,drive_rms_v,") + kSolutionHeader + '\n' + n(s.frequency) + ',' +
           n(s.drive_rms) + ',' + solution_cells(s) + '\n';
}

std::string efficiency_curve_csv(const std::vector<EfficiencyCurvePoint>& points) {
    std::string out = row({"r_l_ohm", "p_out_w", "efficiency", "limiter_engaged"});
    for (const EfficiencyCurvePoint& p : points) {
        out += row({n(p.r_l), n(p.output_power), n(p.efficiency), flag(p.limiter_engaged)});
    }
    return out;
}

std::string zpa_csv(const std::vector<ZpaCurve>& curves) {
    std::string out = row({"r_l_ohm", "frequency_hz", "z_in_ohm", "phase_deg"});
    for (const ZpaCurve& c : curves) {
        for (const ImpedanceRow& r : c.rows) {
            out += row({n(c.r_l), n(r.frequency), n(r.magnitude), n(r.phase_deg)});
        }
    }
    return out;
}

std::string fault_csv(const std::vector<ScenarioResult>& results) {
    std::string out = row({"kind", "engine", "pre_i_t_a", "pre_i_rm_a", "post_i_t_a", "post_i_rm_a",
                           "unclamped_i_t_a", "limiter_engaged", "threshold_a", "verdict", "expected"});
    for (const ScenarioResult& r : results) {
        out += row({to_string(r.kind), to_string(r.engine), n(r.pre_i_t), n(r.pre_i_rm), n(r.post_i_t),
                    n(r.post_i_rm), n(r.unclamped_i_t), flag(r.limiter_engaged), n(r.suppression_threshold),
                    to_string(r.verdict), to_string(expected_verdict(r.kind))});
    }
    return out;
}

std::string waveform_csv(const std::vector<WaveformSample>& samples) {
    std::string out = row({"time_s", "u_in_v", "i_t_a", "i_rm_a", "u_m_v", "i_m_a", "speed_rpm"});
    for (const WaveformSample& s : samples) {
        out += row({n(s.time), n(s.u_in), n(s.i_t), n(s.i_rm), n(s.u_m), n(s.i_m), n(s.speed_rpm)});
    }
    return out;
}

std::string segments_csv(const SquareWaveSegmentTrain& train) {
    std::string out = row({"t_start_s", "level_v"});
    const std::vector<double> starts = train.start_times();
    for (std::size_t k = 0; k < starts.size(); ++k) {
        out += row({n(starts[k]), n(train.segments[k].level)});
    }
    return out;
}

std::string spectrum_csv(const std::vector<SpectralLine>& lines) {
    std::string out = row({"freq_hz", "rms_v"});
    for (const SpectralLine& l : lines) {
        out += row({n(l.frequency), n(l.rms)});
    }
    return out;
}

bool RunReport::all_passed() const {
    for (const Check& c : checks) {
        if (!c.passed) {
            return false;
        }
    }
    return true;
}

std::string RunReport::config_hash() const { return hex64(fnv1a64(command + '\n' + config)); }

std::string RunReport::summary() const {
    std::string out = "wmd " + command + "\n";
    for (const std::string& l : lines) {
        out += l + '\n';
    }
    if (!checks.empty()) {
        out += '\n';
        for (const Check& c : checks) {
            out += (c.passed ? "PASS " : "FAIL ") + c.name;
            if (!c.detail.empty()) {
                out += ": " + c.detail;
            }
            out += '\n';
        }
    }
    return out;
}

std::string RunReport::manifest() const {
    nlohmann::ordered_json doc;
    doc["tool"] = "wmd";
    doc["version"] = kVersion;
    doc["command"] = command;
    doc["config_hash"] = config_hash();
    doc["config"] = config;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const Artifact& a : artifacts) {
        files.push_back({{"name", a.name}, {"bytes", a.content.size()}, {"fnv1a64", hex64(fnv1a64(a.content))}});
    }
    const std::string text = summary();
    files.push_back({{"name", "summary.txt"}, {"bytes", text.size()}, {"fnv1a64", hex64(fnv1a64(text))}});
    doc["artifacts"] = files;
    return doc.dump(2) + '\n';
}

void emit_report(const RunReport& report, const std::filesystem::path& destination) {
    std::filesystem::create_directories(destination);
    for (const Artifact& a : report.artifacts) {
        write_file(destination / a.name, a.content);
    }
    write_file(destination / "summary.txt", report.summary());
    write_file(destination / "manifest.json", report.manifest());
}

}  // namespace wmd
