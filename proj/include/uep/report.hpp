#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uep/channel.hpp"
#include "uep/errors.hpp"
#include "uep/optimizer.hpp"
#include "uep/simulator.hpp"
#include "uep/version.hpp"

namespace uep {

// Rates are accepted in bytes/frame with decimal k/M suffixes ("400k" = 400000).
inline double parse_rate(const std::string& text) {
    if (text.empty()) throw ParamError("rate: empty string");
    std::string num = text;
    double scale = 1.0;
    const char suffix = num.back();
    if (suffix == 'k' || suffix == 'K') {
        scale = 1e3;
        num.pop_back();
    } else if (suffix == 'M') {
        scale = 1e6;
        num.pop_back();
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(num, &used);
    } catch (const std::exception&) {
        throw ParamError("rate: cannot parse '" + text + "'");
    }
    if (used != num.size()) throw ParamError("rate: trailing characters in '" + text + "'");
    if (value <= 0.0) throw ParamError("rate: must be positive, got '" + text + "'");
    return value * scale;
}

inline std::uint64_t fnv1a64(std::span<const char> data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : data) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

// Fixed-width shortest-ish formatting so repeated runs serialize identically.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string format_scientific(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

// Everything needed to regenerate an output file. Timestamps are opt-in
// (set by the caller) so that repeated runs stay byte-identical by default.
struct RunManifest {
    std::string tool = "uepsim";
    std::string version = kVersion;
    std::string profile_name;
    std::string profile_path;
    std::string profile_checksum;
    ChannelSpec channel;
    int n = 255;
    int packet_len = 1500;
    int trials = 500;
    std::uint64_t base_seed = 1;
    bool fast_path = true;
    bool hf_all_or_nothing = false;
    bool restart_chain_per_block = false;
    double tol = 0.01;
    std::vector<double> targets;
    std::vector<Scheme> schemes;
    std::string timestamp;  // empty unless explicitly stamped

    static RunManifest from_config(const ExperimentConfig& cfg, const std::string& profile_path,
                                   const std::string& profile_checksum) {
        RunManifest m;
        m.profile_name = cfg.profile.name;
        m.profile_path = profile_path;
        m.profile_checksum = profile_checksum;
        m.channel = cfg.channel;
        m.n = cfg.n;
        m.packet_len = cfg.packet_len;
        m.trials = cfg.trials;
        m.base_seed = cfg.base_seed;
        m.fast_path = cfg.fast_path;
        m.hf_all_or_nothing = cfg.hf_all_or_nothing;
        m.restart_chain_per_block = cfg.restart_chain_per_block;
        m.tol = cfg.tol;
        m.targets = cfg.targets_rc;
        m.schemes = cfg.schemes;
        return m;
    }
};

inline nlohmann::json manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["tool"] = m.tool;
    j["version"] = m.version;
    j["profile"] = {{"name", m.profile_name}, {"path", m.profile_path}, {"fnv1a64", m.profile_checksum}};
    j["channel"] = {{"kind", channel_kind_name(m.channel.kind)},
                    {"loss_rate", m.channel.loss_rate},
                    {"avg_burst_len", m.channel.avg_burst_len}};
    j["n"] = m.n;
    j["packet_len"] = m.packet_len;
    j["trials"] = m.trials;
    j["base_seed"] = m.base_seed;
    j["fast_path"] = m.fast_path;
    j["hf_all_or_nothing"] = m.hf_all_or_nothing;
    j["restart_chain_per_block"] = m.restart_chain_per_block;
    j["tol"] = m.tol;
    j["targets_rc"] = m.targets;
    std::vector<std::string> names;
    names.reserve(m.schemes.size());
    for (auto s : m.schemes) names.emplace_back(scheme_name(s));
    j["schemes"] = names;
    if (!m.timestamp.empty()) j["timestamp"] = m.timestamp;
    return j;
}

inline nlohmann::json plan_to_json(const ProtectionPlan& plan) {
    nlohmann::json j;
    j["scheme"] = scheme_name(plan.scheme);
    j["n"] = plan.n;
    j["packet_len"] = plan.packet_len;
    j["r_s"] = plan.r_s;
    j["k"] = plan.k;
    j["r_c"] = plan.r_c;
    j["r_c_target"] = plan.r_c_target;
    j["lambda"] = plan.lambda;
    j["expected_mse"] = plan.expected_mse;
    j["expected_psnr"] = psnr(plan.expected_mse);
    j["block_count"] = plan.block_count();
    j["transmitted_bytes"] = plan.transmitted_bytes();
    j["class_bytes"] = plan.layout.class_bytes;
    return j;
}

inline const char* kCsvHeader =
    "scheme,plr,abel,r_c_target,r_c,r_s,K1,K2,K3,mean_mse,stderr_mse,mean_mse_decoded,mean_psnr_decoded,"
    "mean_psnr_all,decoded_ratio";

inline std::string report_to_csv(const RunManifest& m, const SimulationReport& report) {
    std::ostringstream os;
    os << "# " << m.tool << " " << m.version << "\n";
    os << "# profile=" << m.profile_name << " checksum=" << m.profile_checksum;
    if (!m.profile_path.empty()) os << " path=" << m.profile_path;
    os << "\n";
    os << "# channel=" << channel_kind_name(m.channel.kind) << " plr=" << format_double(m.channel.loss_rate)
       << " abel=" << format_double(m.channel.avg_burst_len) << "\n";
    os << "# n=" << m.n << " packet_len=" << m.packet_len << " trials=" << m.trials << " base_seed=" << m.base_seed
       << " fast_path=" << m.fast_path << " hf_all_or_nothing=" << m.hf_all_or_nothing
       << " restart_chain_per_block=" << m.restart_chain_per_block << " tol=" << format_double(m.tol) << "\n";
    if (!m.timestamp.empty()) os << "# timestamp=" << m.timestamp << "\n";
    os << kCsvHeader << "\n";
    const double abel = m.channel.kind == ChannelKind::gilbert ? m.channel.avg_burst_len : 1.0;
    for (const auto& row : report.rows) {
        os << scheme_name(row.scheme) << ',' << format_double(m.channel.loss_rate) << ',' << format_double(abel)
           << ',' << format_double(row.target_rc) << ',' << format_double(row.plan.r_c) << ','
           << format_double(row.plan.r_s) << ',' << row.plan.k[0] << ',' << row.plan.k[1] << ',' << row.plan.k[2]
           << ',' << format_double(row.mean_mse) << ',' << format_double(row.stderr_mse) << ','
           << format_double(row.mean_mse_decoded) << ',' << format_double(row.mean_psnr_decoded) << ','
           << format_double(row.mean_psnr_all) << ',' << format_double(row.decoded_ratio) << "\n";
    }
    return os.str();
}

inline nlohmann::json report_to_json(const RunManifest& m, const SimulationReport& report) {
    nlohmann::json j;
    j["manifest"] = manifest_to_json(m);
    j["rows"] = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json r;
        r["scheme"] = scheme_name(row.scheme);
        r["target_rc"] = row.target_rc;
        r["plan"] = plan_to_json(row.plan);
        r["trials"] = row.trials;
        r["mean_mse"] = row.mean_mse;
        r["stderr_mse"] = row.stderr_mse;
        r["mean_mse_decoded"] = row.mean_mse_decoded;
        r["mean_psnr_decoded"] = row.mean_psnr_decoded;
        r["mean_psnr_all"] = row.mean_psnr_all;
        r["decoded_ratio"] = row.decoded_ratio;
        j["rows"].push_back(std::move(r));
    }
    return j;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

}  // namespace uep
