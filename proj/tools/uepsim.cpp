// uepsim: rate-distortion optimal unequal error protection of packetized
// codestreams over lossy networks. Subcommands: optimize, simulate, validate,
// pmf.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uep/report.hpp"
#include "uep/simulator.hpp"
#include "uep/validate.hpp"
#include "uep/version.hpp"

namespace {

namespace fs = std::filesystem;

#ifndef UEPSIM_DEFAULT_PROFILE_DIR
#define UEPSIM_DEFAULT_PROFILE_DIR "data"
#endif

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;  // infeasible request or validation failure

struct ProfileRef {
    uep::CodestreamProfile profile;
    std::string path;
    std::string checksum;
};

// "--profile default" resolves through UEPSIM_PROFILE_DIR, then the shipped
// profile directory; anything containing a path separator or .json is a path.
ProfileRef resolve_profile(const std::string& arg) {
    std::vector<fs::path> candidates;
    if (arg.find('/') != std::string::npos || arg.ends_with(".json")) {
        candidates.emplace_back(arg);
    } else {
        const std::string file = arg + (arg == "default" ? "_profile.json" : ".json");
        if (const char* dir = std::getenv("UEPSIM_PROFILE_DIR")) candidates.emplace_back(fs::path(dir) / file);
        candidates.emplace_back(fs::path(UEPSIM_DEFAULT_PROFILE_DIR) / file);
    }
    for (const auto& path : candidates) {
        if (!fs::exists(path)) continue;
        ProfileRef ref;
        const auto text = uep::read_file(path);
        ref.profile = uep::parse_profile(text, path.string());
        ref.path = path.string();
        ref.checksum = uep::fnv1a64_hex(text);
        return ref;
    }
    throw uep::ParseError("profile '" + arg + "' not found");
}

struct CommonArgs {
    std::string profile = "default";
    std::string channel = "gilbert";
    double plr = 0.05;
    double abel = 20.0;
    int n = 255;
    int packet_len = 1500;
    std::vector<std::string> rates;
    double tol = 0.01;
    bool hf_all_or_nothing = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool rates_required) {
    cmd->add_option("--profile", args.profile, "Profile name or path to a profile JSON file")
        ->capture_default_str();
    cmd->add_option("--channel", args.channel, "Channel model")
        ->check(CLI::IsMember({"gilbert", "bernoulli"}))
        ->capture_default_str();
    cmd->add_option("--plr", args.plr, "Packet loss rate in [0,1)")->capture_default_str();
    cmd->add_option("--abel", args.abel, "Average burst error length in packets (Gilbert)")->capture_default_str();
    cmd->add_option("--n", args.n, "Packets per interleaving block (<= 255)")->capture_default_str();
    cmd->add_option("-L,--packet-len", args.packet_len, "Packet length in bytes")->capture_default_str();
    cmd->add_option("--tol", args.tol, "Relative channel-rate tolerance")->capture_default_str();
    cmd->add_flag("--hf-all-or-nothing", args.hf_all_or_nothing,
                  "Charge the full HF penalty on any HF corruption instead of scaling by block fraction");
    auto* rc = cmd->add_option("--rc", args.rates, "Target channel rate(s), bytes/frame (k/M suffixes)");
    if (rates_required) rc->required();
}

uep::ChannelSpec channel_from(const CommonArgs& args) {
    uep::ChannelSpec spec;
    spec.kind = args.channel == "bernoulli" ? uep::ChannelKind::bernoulli : uep::ChannelKind::gilbert;
    spec.loss_rate = args.plr;
    spec.avg_burst_len = args.abel;
    return spec;
}

std::vector<uep::Scheme> parse_schemes(const std::vector<std::string>& names) {
    std::vector<uep::Scheme> out;
    for (const auto& name : names) {
        if (name == "uep")
            out.push_back(uep::Scheme::uep);
        else if (name == "eep")
            out.push_back(uep::Scheme::eep);
        else if (name == "unprotected")
            out.push_back(uep::Scheme::unprotected);
        else
            throw uep::ParamError("unknown scheme '" + name + "'");
    }
    return out;
}

int cmd_optimize(const CommonArgs& common, const std::vector<std::string>& schemes, const std::string& out_path) {
    const auto ref = resolve_profile(common.profile);
    const auto spec = channel_from(common);
    const auto pmf = uep::block_loss_pmf(uep::fit_gilbert(spec), common.n);

    nlohmann::json out = nlohmann::json::array();
    std::printf("%-12s %12s %12s %12s  %-15s %6s %12s %10s\n", "scheme", "rc_target", "rc", "rs", "K", "blocks",
                "E[mse]", "E[psnr]");
    for (const auto& scheme : parse_schemes(schemes)) {
        for (const auto& rate : common.rates) {
            const double target = uep::parse_rate(rate);
            uep::ProtectionPlan plan;
            switch (scheme) {
                case uep::Scheme::uep: {
                    uep::UepSolveOptions opt;
                    opt.tol = common.tol;
                    plan = uep::solve_uep(target, ref.profile, pmf, common.packet_len, common.hf_all_or_nothing, opt);
                    break;
                }
                case uep::Scheme::eep:
                    plan = uep::solve_eep(target, ref.profile, pmf, common.packet_len, common.hf_all_or_nothing);
                    break;
                default:
                    plan = uep::unprotected_plan(target, ref.profile, pmf, common.packet_len,
                                                 common.hf_all_or_nothing);
            }
            char kbuf[32];
            std::snprintf(kbuf, sizeof kbuf, "[%d,%d,%d]", plan.k[0], plan.k[1], plan.k[2]);
            std::printf("%-12s %12.0f %12.1f %12.1f  %-15s %6d %12.4f %10.2f\n", uep::scheme_name(scheme), target,
                        plan.r_c, plan.r_s, kbuf, plan.block_count(), plan.expected_mse,
                        uep::psnr(plan.expected_mse));
            auto j = uep::plan_to_json(plan);
            j["profile"] = ref.profile.name;
            j["channel"] = {{"kind", uep::channel_kind_name(spec.kind)},
                            {"loss_rate", spec.loss_rate},
                            {"avg_burst_len", spec.avg_burst_len}};
            out.push_back(std::move(j));
        }
    }
    if (!out_path.empty()) {
        uep::write_file(out_path, out.dump(2) + "\n");
        std::printf("wrote %zu plan(s) to %s\n", out.size(), out_path.c_str());
    }
    return kExitOk;
}

// Load an experiment configuration from a manifest JSON (either a bare
// manifest object or a full report containing one), so any emitted report can
// be regenerated from its own manifest.
struct LoadedConfig {
    uep::ExperimentConfig cfg;
    std::string profile_arg;
};

LoadedConfig config_from_manifest(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(uep::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw uep::ParseError("config " + path + ": " + e.what());
    }
    if (j.contains("manifest")) j = j["manifest"];
    LoadedConfig out;
    try {
        const auto& ch = j.at("channel");
        out.cfg.channel.kind = ch.at("kind").get<std::string>() == "bernoulli" ? uep::ChannelKind::bernoulli
                                                                               : uep::ChannelKind::gilbert;
        out.cfg.channel.loss_rate = ch.at("loss_rate").get<double>();
        out.cfg.channel.avg_burst_len = ch.at("avg_burst_len").get<double>();
        out.cfg.targets_rc = j.at("targets_rc").get<std::vector<double>>();
        out.cfg.schemes = parse_schemes(j.at("schemes").get<std::vector<std::string>>());
        out.cfg.trials = j.at("trials").get<int>();
        out.cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
        out.cfg.fast_path = j.at("fast_path").get<bool>();
        out.cfg.hf_all_or_nothing = j.at("hf_all_or_nothing").get<bool>();
        out.cfg.restart_chain_per_block = j.at("restart_chain_per_block").get<bool>();
        out.cfg.n = j.at("n").get<int>();
        out.cfg.packet_len = j.at("packet_len").get<int>();
        out.cfg.tol = j.at("tol").get<double>();
        out.profile_arg = j.at("profile").at("path").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw uep::ParseError("config " + path + ": " + e.what());
    }
    return out;
}

int cmd_simulate(const CommonArgs& common, const std::vector<std::string>& schemes, int trials,
                 std::uint64_t seed, bool byte_path, bool restart_per_block, const std::string& config_path,
                 const std::string& csv_path, const std::string& json_path, const std::string& stamp) {
    if (config_path.empty() && common.rates.empty()) {
        std::fprintf(stderr, "simulate: either --rc or --config is required\n");
        return kExitUsage;
    }
    uep::ExperimentConfig cfg;
    std::string profile_arg = common.profile;
    if (!config_path.empty()) {
        auto loaded = config_from_manifest(config_path);
        cfg = std::move(loaded.cfg);
        profile_arg = loaded.profile_arg;
    } else {
        cfg.channel = channel_from(common);
        for (const auto& rate : common.rates) cfg.targets_rc.push_back(uep::parse_rate(rate));
        cfg.schemes = parse_schemes(schemes);
        cfg.trials = trials;
        cfg.base_seed = seed;
        cfg.fast_path = !byte_path;
        cfg.hf_all_or_nothing = common.hf_all_or_nothing;
        cfg.restart_chain_per_block = restart_per_block;
        cfg.n = common.n;
        cfg.packet_len = common.packet_len;
        cfg.tol = common.tol;
    }
    const auto ref = resolve_profile(profile_arg);
    cfg.profile = ref.profile;

    const auto report = uep::run_experiment(cfg);
    auto manifest = uep::RunManifest::from_config(cfg, ref.path, ref.checksum);
    manifest.timestamp = stamp;

    const auto csv = uep::report_to_csv(manifest, report);
    if (csv_path.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        uep::write_file(csv_path, csv);
        std::printf("wrote %s (%zu rate points)\n", csv_path.c_str(), report.rows.size());
    }
    if (!json_path.empty()) uep::write_file(json_path, uep::report_to_json(manifest, report).dump(2) + "\n");
    return kExitOk;
}

int cmd_validate(const std::string& profile, bool quick, std::uint64_t seed) {
    const auto ref = resolve_profile(profile);
    uep::ValidationOptions opt;
    opt.quick = quick;
    opt.seed = seed;
    const auto results = uep::run_validation(ref.profile, opt);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("[%s] %-24s %6.2fs  %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                    r.detail.c_str());
        all_pass &= r.pass;
    }
    std::printf("%s: %zu checks at %s scale\n", all_pass ? "OK" : "FAILED", results.size(),
                quick ? "quick" : "full");
    return all_pass ? kExitOk : kExitFailure;
}

int cmd_pmf(const CommonArgs& common, const std::string& out_path) {
    const auto spec = channel_from(common);
    const auto pmf = uep::block_loss_pmf(uep::fit_gilbert(spec), common.n);
    std::ostringstream os;
    os << "# uepsim " << uep::kVersion << " pmf channel=" << uep::channel_kind_name(spec.kind)
       << " plr=" << uep::format_double(spec.loss_rate) << " abel=" << uep::format_double(spec.avg_burst_len)
       << " n=" << common.n << " mean=" << uep::format_double(pmf.mean()) << "\n";
    os << "lost_packets,probability\n";
    for (int j = 0; j <= pmf.n; ++j)
        os << j << ',' << uep::format_double(pmf.p[static_cast<std::size_t>(j)]) << "\n";
    if (out_path.empty())
        std::fputs(os.str().c_str(), stdout);
    else
        uep::write_file(out_path, os.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unequal error protection planner and packet-loss simulator"};
    app.set_version_flag("--version", uep::kVersion);
    app.require_subcommand(1);

    CommonArgs opt_args, sim_args, pmf_args;
    std::vector<std::string> opt_schemes{"uep"};
    std::vector<std::string> sim_schemes{"uep", "eep", "unprotected"};
    std::string opt_out, sim_csv, sim_json, sim_stamp, sim_config, pmf_out, validate_profile = "default";
    int sim_trials = 500;
    std::uint64_t sim_seed = 1, validate_seed = 1;
    bool sim_byte_path = false, sim_restart = false, validate_quick = false;

    auto* optimize = app.add_subcommand("optimize", "Solve for a protection plan at given channel rates");
    add_common(optimize, opt_args, true);
    optimize->add_option("--scheme", opt_schemes, "Schemes: uep, eep, unprotected")->capture_default_str();
    optimize->add_option("-o,--out", opt_out, "Write plan JSON here");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo transmission experiment");
    add_common(simulate, sim_args, false);
    simulate->add_option("--scheme", sim_schemes, "Schemes: uep, eep, unprotected")->capture_default_str();
    simulate->add_option("--trials", sim_trials, "Error patterns per rate point")->capture_default_str();
    simulate->add_option("--seed", sim_seed, "Base seed; trial t uses base_seed + t")->capture_default_str();
    simulate->add_flag("--byte-path", sim_byte_path, "Exercise the full Reed-Solomon byte path");
    simulate->add_flag("--restart-chain-per-block", sim_restart,
                       "Restart the loss chain at every block instead of one chain per frame");
    simulate->add_option("-o,--out", sim_csv, "Write the CSV report here (default: stdout)");
    simulate->add_option("--json", sim_json, "Also write a JSON report with the full manifest");
    simulate->add_option("--stamp", sim_stamp, "Embed this timestamp string in the manifest");
    simulate->add_option("--config", sim_config,
                         "Rerun from a manifest or report JSON instead of passing flags");

    auto* validate = app.add_subcommand("validate", "Run the oracle suite and print a scorecard");
    validate->add_option("--profile", validate_profile, "Profile name or path")->capture_default_str();
    validate->add_flag("--quick", validate_quick, "Reduced trial counts, same checks");
    validate->add_option("--seed", validate_seed, "Oracle seed")->capture_default_str();

    auto* pmf = app.add_subcommand("pmf", "Dump the per-block loss-count distribution as CSV");
    add_common(pmf, pmf_args, false);
    pmf->add_option("-o,--out", pmf_out, "Write the CSV here (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (optimize->parsed()) return cmd_optimize(opt_args, opt_schemes, opt_out);
        if (simulate->parsed())
            return cmd_simulate(sim_args, sim_schemes, sim_trials, sim_seed, sim_byte_path, sim_restart,
                                sim_config, sim_csv, sim_json, sim_stamp);
        if (validate->parsed()) return cmd_validate(validate_profile, validate_quick, validate_seed);
        if (pmf->parsed()) return cmd_pmf(pmf_args, pmf_out);
    } catch (const uep::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitUsage;
}
