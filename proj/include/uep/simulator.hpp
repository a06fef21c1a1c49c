#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "uep/channel.hpp"
#include "uep/errors.hpp"
#include "uep/optimizer.hpp"
#include "uep/packetizer.hpp"
#include "uep/profile.hpp"

namespace uep {

// Peak signal-to-noise ratio for 8-bit content, per-frame. A zero MSE is
// capped at a configurable ceiling.
inline double psnr(double mse, double cap_db = 99.0) {
    if (mse <= 0.0) return cap_db;
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

struct ExperimentConfig {
    CodestreamProfile profile;
    ChannelSpec channel;
    std::vector<double> targets_rc;
    std::vector<Scheme> schemes{Scheme::uep};
    int trials = 500;
    std::uint64_t base_seed = 1;
    bool fast_path = true;             // count-level sufficient statistics
    bool hf_all_or_nothing = false;
    bool restart_chain_per_block = false;  // default: one chain per frame
    int n = 255;
    int packet_len = 1500;
    double tol = 0.01;

    void validate() const {
        if (trials < 1) throw ParamError("config: trials must be >= 1");
        if (targets_rc.empty()) throw ParamError("config: no target rates");
        if (schemes.empty()) throw ParamError("config: no schemes");
        for (double t : targets_rc)
            if (t < profile.min_rate()) throw ParamError("config: target rate below profile minimum");
    }
};

struct TrialOutcome {
    bool frame_decoded = true;
    double mse = 0.0;
    std::array<ClassState, 3> class_state{ClassState::recovered, ClassState::recovered, ClassState::recovered};
    double lf_fraction_lost = 0.0;    // payload-weighted average over blocks
    double hf_dropped_fraction = 0.0;  // failed-block fraction
    int lost_packets = 0;

    bool operator==(const TrialOutcome&) const = default;
};

namespace detail {

inline ClassState worse(ClassState a, ClassState b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

}  // namespace detail

// Assemble a trial outcome from per-block loss counts. Both simulator paths
// funnel through this, which is what makes them bit-identical: under an MDS
// code the loss count is a sufficient statistic for recovery.
inline TrialOutcome assemble_outcome(const ProtectionPlan& plan, const CodestreamProfile& profile,
                                     std::span<const int> block_losses, bool hf_all_or_nothing) {
    const FrameLayout& frame = plan.layout;
    if (static_cast<int>(block_losses.size()) != frame.block_count())
        throw ParamError("assemble_outcome: loss counts do not cover the frame");

    TrialOutcome out;
    bool critical_failed = false;
    bool any_block_failed = false;  // any class in any block beyond budget
    double lf_weight = 0.0;
    double lf_lost = 0.0;
    int hf_failed_blocks = 0;
    for (int b = 0; b < frame.block_count(); ++b) {
        const auto& layout = frame.blocks[static_cast<std::size_t>(b)];
        const int j = block_losses[static_cast<std::size_t>(b)];
        out.lost_packets += j;
        const auto rec = predict_recovery(layout, j);
        for (int c = 0; c < 3; ++c)
            out.class_state[static_cast<std::size_t>(c)] =
                detail::worse(out.class_state[static_cast<std::size_t>(c)], rec.state[static_cast<std::size_t>(c)]);
        critical_failed |= rec.state[kClassCritical] != ClassState::recovered;
        const double w = static_cast<double>(layout.payload_bytes[kClassLfData]);
        lf_weight += w;
        if (rec.state[kClassLfData] != ClassState::recovered) {
            lf_lost += w * rec.fraction_lost[kClassLfData];
            any_block_failed = true;
        }
        if (rec.state[kClassHf] != ClassState::recovered) {
            ++hf_failed_blocks;
            any_block_failed = true;
        }
        any_block_failed |= rec.state[kClassCritical] != ClassState::recovered;
    }

    if (plan.scheme == Scheme::eep) {
        // Equal protection decodes all-or-nothing: one block beyond the
        // correction budget drops the frame.
        out.frame_decoded = !any_block_failed;
        out.mse = out.frame_decoded ? source_distortion(profile, plan.r_s) : profile.delta_all;
        if (!out.frame_decoded) {
            out.lf_fraction_lost = lf_weight > 0.0 ? lf_lost / lf_weight : 0.0;
            out.hf_dropped_fraction = static_cast<double>(hf_failed_blocks) / frame.block_count();
        }
        return out;
    }

    if (critical_failed) {
        out.frame_decoded = false;
        out.mse = profile.delta_all;
        return out;
    }
    out.frame_decoded = true;
    out.lf_fraction_lost = lf_weight > 0.0 ? lf_lost / lf_weight : 0.0;
    out.hf_dropped_fraction = static_cast<double>(hf_failed_blocks) / frame.block_count();
    const double hf_term = hf_all_or_nothing ? (hf_failed_blocks > 0 ? profile.delta_hf : 0.0)
                                             : profile.delta_hf * out.hf_dropped_fraction;
    out.mse = source_distortion(profile, plan.r_s) + 100.0 * profile.delta * out.lf_fraction_lost + hf_term;
    return out;
}

// Count-level fast path.
inline TrialOutcome run_trial(const ProtectionPlan& plan, const CodestreamProfile& profile,
                              std::span<const int> block_losses, bool hf_all_or_nothing = false) {
    return assemble_outcome(plan, profile, block_losses, hf_all_or_nothing);
}

namespace detail {

inline std::uint64_t payload_seed(std::uint64_t base_seed, int trial) {
    // SplitMix64 over a stream id distinct from the channel seeds.
    std::uint64_t z = base_seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(trial + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Byte-level path: actually builds the interleaving blocks from pseudorandom
// class payloads, erases the masked packets, runs the Reed-Solomon machinery
// and verifies recovered bytes against the originals before producing the
// same count-level outcome.
inline TrialOutcome run_trial_bytes(const ProtectionPlan& plan, const CodestreamProfile& profile,
                                    std::span<const std::vector<std::uint8_t>> block_masks,
                                    std::uint64_t payload_seed, bool hf_all_or_nothing = false) {
    const FrameLayout& frame = plan.layout;
    if (static_cast<int>(block_masks.size()) != frame.block_count())
        throw ParamError("run_trial_bytes: masks do not cover the frame");

    std::mt19937_64 rng(payload_seed);
    std::array<std::vector<std::uint8_t>, 3> streams;
    for (int c = 0; c < 3; ++c) {
        streams[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(frame.class_bytes[static_cast<std::size_t>(c)]));
        for (auto& b : streams[static_cast<std::size_t>(c)]) b = static_cast<std::uint8_t>(rng());
    }
    const auto blocks = build_blocks(streams, frame);

    std::vector<int> counts(static_cast<std::size_t>(frame.block_count()), 0);
    std::array<std::size_t, 3> cursor{0, 0, 0};
    for (int b = 0; b < frame.block_count(); ++b) {
        const auto& mask = block_masks[static_cast<std::size_t>(b)];
        const auto rec = recover_block(blocks[static_cast<std::size_t>(b)], mask);
        counts[static_cast<std::size_t>(b)] = rec.summary.lost_packets;
        // Recovered payloads must match the transmitted bytes exactly.
        for (int c = 0; c < 3; ++c) {
            const auto len = static_cast<std::size_t>(
                blocks[static_cast<std::size_t>(b)].layout.payload_bytes[static_cast<std::size_t>(c)]);
            auto& cur = cursor[static_cast<std::size_t>(c)];
            if (rec.summary.state[static_cast<std::size_t>(c)] == ClassState::recovered) {
                const auto& got = rec.payload[static_cast<std::size_t>(c)];
                if (got.size() != len ||
                    !std::equal(got.begin(), got.end(),
                                streams[static_cast<std::size_t>(c)].begin() + static_cast<std::ptrdiff_t>(cur)))
                    throw Error("run_trial_bytes: recovered payload mismatch");
            }
            cur += len;
        }
    }
    return assemble_outcome(plan, profile, counts, hf_all_or_nothing);
}

struct RatePointResult {
    Scheme scheme = Scheme::uep;
    double target_rc = 0.0;
    ProtectionPlan plan;
    int trials = 0;
    double mean_mse = 0.0;
    double stderr_mse = 0.0;
    double mean_mse_decoded = 0.0;
    double mean_psnr_decoded = 0.0;
    double mean_psnr_all = 0.0;
    double decoded_ratio = 0.0;
};

struct SimulationReport {
    std::vector<RatePointResult> rows;
};

namespace detail {

// Neumaier compensated summation; trials are aggregated in a fixed order so
// repeated runs are bit-identical.
class Accumulator {
public:
    void add(double v) {
        const double t = sum_ + v;
        comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
        sum_ = t;
        ++count_;
    }
    [[nodiscard]] double sum() const { return sum_ + comp_; }
    [[nodiscard]] long count() const { return count_; }
    [[nodiscard]] double mean() const { return count_ > 0 ? sum() / static_cast<double>(count_) : 0.0; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
    long count_ = 0;
};

}  // namespace detail

// Sample per-block loss masks for one frame: one continuous chain realization
// per frame by default (bursts cross block boundaries), or restarted from the
// stationary distribution at every block.
inline std::vector<std::vector<std::uint8_t>> sample_frame_masks(const FrameLayout& frame,
                                                                 const GilbertParams& params, std::uint64_t seed,
                                                                 bool restart_per_block) {
    LossSampler sampler(params, seed);
    std::vector<std::vector<std::uint8_t>> masks;
    masks.reserve(static_cast<std::size_t>(frame.block_count()));
    for (int b = 0; b < frame.block_count(); ++b) {
        if (restart_per_block && b > 0) sampler.reset_stationary();
        masks.push_back(sampler.sample(frame.n));
    }
    return masks;
}

inline ProtectionPlan plan_for_scheme(Scheme scheme, double target_rc, const CodestreamProfile& profile,
                                      const LossPmf& pmf, const ExperimentConfig& cfg) {
    switch (scheme) {
        case Scheme::uep: {
            UepSolveOptions opt;
            opt.tol = cfg.tol;
            return solve_uep(target_rc, profile, pmf, cfg.packet_len, cfg.hf_all_or_nothing, opt);
        }
        case Scheme::eep:
            return solve_eep(target_rc, profile, pmf, cfg.packet_len, cfg.hf_all_or_nothing);
        default:
            return unprotected_plan(target_rc, profile, pmf, cfg.packet_len, cfg.hf_all_or_nothing);
    }
}

inline RatePointResult run_rate_point(const ProtectionPlan& plan, const ExperimentConfig& cfg,
                                      const GilbertParams& params) {
    RatePointResult row;
    row.scheme = plan.scheme;
    row.target_rc = plan.r_c_target;
    row.plan = plan;
    row.trials = cfg.trials;

    std::vector<double> mses(static_cast<std::size_t>(cfg.trials));
    detail::Accumulator mse_all, mse_dec, psnr_dec, psnr_all;
    long decoded = 0;
    for (int t = 0; t < cfg.trials; ++t) {
        const auto masks = sample_frame_masks(plan.layout, params, cfg.base_seed + static_cast<std::uint64_t>(t),
                                              cfg.restart_chain_per_block);
        TrialOutcome outcome;
        if (cfg.fast_path) {
            std::vector<int> counts;
            counts.reserve(masks.size());
            for (const auto& m : masks) {
                int j = 0;
                for (auto v : m) j += (v != 0);
                counts.push_back(j);
            }
            outcome = run_trial(plan, cfg.profile, counts, cfg.hf_all_or_nothing);
        } else {
            outcome = run_trial_bytes(plan, cfg.profile, masks,
                                      detail::payload_seed(cfg.base_seed, t), cfg.hf_all_or_nothing);
        }
        mses[static_cast<std::size_t>(t)] = outcome.mse;
        mse_all.add(outcome.mse);
        psnr_all.add(psnr(outcome.mse));
        if (outcome.frame_decoded) {
            ++decoded;
            mse_dec.add(outcome.mse);
            psnr_dec.add(psnr(outcome.mse));
        }
    }

    row.mean_mse = mse_all.mean();
    row.decoded_ratio = static_cast<double>(decoded) / cfg.trials;
    row.mean_mse_decoded = mse_dec.count() > 0 ? mse_dec.mean() : std::numeric_limits<double>::quiet_NaN();
    row.mean_psnr_decoded = psnr_dec.count() > 0 ? psnr_dec.mean() : std::numeric_limits<double>::quiet_NaN();
    row.mean_psnr_all = psnr_all.mean();

    detail::Accumulator var;
    for (double v : mses) var.add((v - row.mean_mse) * (v - row.mean_mse));
    row.stderr_mse = cfg.trials > 1 ? std::sqrt(var.sum() / (static_cast<double>(cfg.trials) *
                                                             static_cast<double>(cfg.trials - 1)))
                                    : 0.0;
    return row;
}

inline SimulationReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto params = fit_gilbert(cfg.channel);
    const auto pmf = block_loss_pmf(params, cfg.n);
    SimulationReport report;
    for (Scheme scheme : cfg.schemes) {
        for (double target : cfg.targets_rc) {
            const auto plan = plan_for_scheme(scheme, target, cfg.profile, pmf, cfg);
            report.rows.push_back(run_rate_point(plan, cfg, params));
        }
    }
    return report;
}

}  // namespace uep
