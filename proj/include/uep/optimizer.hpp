#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "uep/channel.hpp"
#include "uep/errors.hpp"
#include "uep/packetizer.hpp"
#include "uep/profile.hpp"

namespace uep {

enum class Scheme { uep, eep, unprotected };

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::uep: return "uep";
        case Scheme::eep: return "eep";
        default: return "unprotected";
    }
}

// Everything needed to evaluate expected channel distortion: the per-block
// loss-count distribution, the three distortion constants, and how a frame
// aggregates over its interleaving blocks.
struct ChannelDistortionModel {
    PmfTails tails;
    int n = 255;
    double delta = 90.0;
    double delta_all = 9000.0;
    double delta_hf = 4.0;
    int block_count = 1;
    bool hf_all_or_nothing = false;

    ChannelDistortionModel() = default;
    ChannelDistortionModel(const LossPmf& pmf, const CodestreamProfile& profile, int blocks = 1,
                           bool hf_all = false)
        : tails(pmf),
          n(pmf.n),
          delta(profile.delta),
          delta_all(profile.delta_all),
          delta_hf(profile.delta_hf),
          block_count(blocks),
          hf_all_or_nothing(hf_all) {}

    // P(at least one of `block_count` independent blocks exceeds the budget).
    [[nodiscard]] double any_block(double per_block) const {
        if (block_count <= 1) return per_block;
        return -std::expm1(block_count * std::log1p(-per_block));
    }
};

// Expected distortion contributed by one class protected with an (n,k) code.
// Critical content costs a full frame on any failed block; LF data degrades
// in proportion to the lost packet fraction; HF content costs delta_hf scaled
// by the failed-block fraction (or fully, in all-or-nothing mode).
inline double dc_class(int cls, int k, const ChannelDistortionModel& m) {
    if (k < 1 || k > m.n) throw ParamError("dc_class: k out of [1,n]");
    const double exceed = m.tails.loss_exceeds(k);
    switch (cls) {
        case kClassCritical:
            return m.delta_all * m.any_block(exceed);
        case kClassLfData:
            return 100.0 * m.delta * m.tails.lost_fraction_tail(k);
        case kClassHf:
            return m.hf_all_or_nothing ? m.delta_hf * m.any_block(exceed) : m.delta_hf * exceed;
        default:
            throw ParamError("dc_class: class index out of range");
    }
}

// Continuous channel rate n * sum_i R_S,i / K_i in bytes/frame.
inline double channel_rate(const CodestreamProfile& profile, double r_s, const std::array<int, 3>& k, int n) {
    const auto sizes = class_sizes(profile, r_s);
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) sum += sizes[static_cast<std::size_t>(c)] / k[static_cast<std::size_t>(c)];
    return n * sum;
}

// Integer per-class byte counts summing to round(r_s), largest remainder.
inline std::array<std::int64_t, 3> integer_class_bytes(const CodestreamProfile& profile, double r_s) {
    const auto sizes = class_sizes(profile, r_s);
    const auto total = static_cast<std::int64_t>(std::llround(r_s));
    std::array<std::int64_t, 3> out{};
    std::array<double, 3> frac{};
    std::int64_t used = 0;
    for (int c = 0; c < 3; ++c) {
        out[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(std::floor(sizes[static_cast<std::size_t>(c)]));
        frac[static_cast<std::size_t>(c)] = sizes[static_cast<std::size_t>(c)] - static_cast<double>(out[static_cast<std::size_t>(c)]);
        used += out[static_cast<std::size_t>(c)];
    }
    for (std::int64_t i = used; i < total; ++i) {
        int best = 0;
        for (int c = 1; c < 3; ++c)
            if (frac[static_cast<std::size_t>(c)] > frac[static_cast<std::size_t>(best)]) best = c;
        ++out[static_cast<std::size_t>(best)];
        frac[static_cast<std::size_t>(best)] -= 1.0;
    }
    return out;
}

inline FrameLayout frame_layout_for(const CodestreamProfile& profile, double r_s, const std::array<int, 3>& k, int n,
                                    int packet_len) {
    return plan_frame(integer_class_bytes(profile, r_s), k, n, packet_len);
}

// Expected total distortion under the per-class decode policy: the source
// term plus the three additive class terms.
inline double expected_total_distortion(double r_s, const std::array<int, 3>& k, const CodestreamProfile& profile,
                                        const ChannelDistortionModel& model) {
    double d = source_distortion(profile, r_s);
    for (int c = 0; c < 3; ++c) d += dc_class(c, k[static_cast<std::size_t>(c)], model);
    return d;
}

// Expected distortion of an equally protected frame, whose policy is
// all-or-nothing: a block beyond the correction budget drops the frame.
inline double expected_eep_distortion(double r_s, int k, const CodestreamProfile& profile,
                                      const ChannelDistortionModel& model) {
    return source_distortion(profile, r_s) + model.delta_all * model.any_block(model.tails.loss_exceeds(k));
}

struct ProtectionPlan {
    Scheme scheme = Scheme::uep;
    int n = 255;
    int packet_len = 1500;
    double r_s = 0.0;
    std::array<int, 3> k{255, 255, 255};
    double r_c = 0.0;         // continuous bit-budget formula
    double r_c_target = 0.0;
    double lambda = 0.0;      // multiplier at the solution (UEP only)
    double expected_mse = 0.0;
    FrameLayout layout;

    [[nodiscard]] int block_count() const { return layout.block_count(); }
    [[nodiscard]] std::int64_t transmitted_bytes() const { return layout.transmitted_bytes(); }
};

struct UepSolveOptions {
    double tol = 0.01;          // relative channel-rate tolerance
    int max_outer = 64;         // lambda bisection iterations
    int max_inner = 50;         // alternating two-step iterations
    double lambda_lo = 1e-12;
    double lambda_hi = 1e3;
};

// One class of the Lagrangian: K_c = argmin_K D_C,c(K) + lambda * n * bytes / K,
// the discrete counterpart of the stationarity condition. Ties prefer the
// larger K (less redundancy).
inline int solve_k_class(int cls, double lambda, double class_bytes, const ChannelDistortionModel& model) {
    int best_k = model.n;
    double best = std::numeric_limits<double>::infinity();
    for (int k = model.n; k >= 1; --k) {
        const double obj = dc_class(cls, k, model) + lambda * static_cast<double>(model.n) * class_bytes / k;
        if (obj < best) {
            best = obj;
            best_k = k;
        }
    }
    return best_k;
}

inline std::array<int, 3> solve_k_given_lambda(double lambda, double r_s, const CodestreamProfile& profile,
                                               const ChannelDistortionModel& model) {
    const auto sizes = class_sizes(profile, r_s);
    std::array<int, 3> k{};
    for (int c = 0; c < 3; ++c)
        k[static_cast<std::size_t>(c)] = solve_k_class(c, lambda, sizes[static_cast<std::size_t>(c)], model);
    return k;
}

// Scalar step of the alternation: with K fixed the channel terms are constant,
// so minimize D_S(r) + lambda * R_C(r, K). Both parts are piecewise linear in
// r, hence the minimum sits on a grid vertex; ties prefer the larger rate.
inline double solve_rs_given_lambda(double lambda, const std::array<int, 3>& k, const CodestreamProfile& profile,
                                    int n) {
    double best_r = profile.min_rate();
    double best = std::numeric_limits<double>::infinity();
    for (double r : profile.rate_grid) {
        const double obj = source_distortion(profile, r) + lambda * channel_rate(profile, r, k, n);
        if (obj < best || (obj == best && r > best_r)) {
            best = obj;
            best_r = r;
        }
    }
    return best_r;
}

namespace detail {

struct Iterate {
    double lambda = 0.0;
    double r_s = 0.0;
    std::array<int, 3> k{255, 255, 255};
    double r_c = 0.0;
    int block_count = 1;
};

// Alternate the two stationarity steps from K = [n,n,n] until (r_s, K) stops
// moving. The block count feeds back into the frame-drop aggregation, so it
// is refreshed every pass.
inline Iterate inner_solve(double lambda, const CodestreamProfile& profile, ChannelDistortionModel model,
                           int packet_len, const UepSolveOptions& opt) {
    Iterate it;
    it.lambda = lambda;
    it.k = {model.n, model.n, model.n};
    model.block_count = 1;
    double prev_r = -1.0;
    std::array<int, 3> prev_k{-1, -1, -1};
    for (int pass = 0; pass < opt.max_inner; ++pass) {
        it.r_s = solve_rs_given_lambda(lambda, it.k, profile, model.n);
        model.block_count = frame_layout_for(profile, it.r_s, it.k, model.n, packet_len).block_count();
        it.k = solve_k_given_lambda(lambda, it.r_s, profile, model);
        if (it.r_s == prev_r && it.k == prev_k) break;
        prev_r = it.r_s;
        prev_k = it.k;
    }
    it.block_count = frame_layout_for(profile, it.r_s, it.k, model.n, packet_len).block_count();
    it.r_c = channel_rate(profile, it.r_s, it.k, model.n);
    return it;
}

// For fixed K, move r_s along the piecewise-linear channel-rate curve to meet
// the budget exactly (clamped to the profile range).
inline double rate_for_budget(const CodestreamProfile& profile, const std::array<int, 3>& k, int n, double target_rc) {
    const auto rc_at = [&](double r) { return channel_rate(profile, r, k, n); };
    if (target_rc <= rc_at(profile.min_rate())) return profile.min_rate();
    if (target_rc >= rc_at(profile.max_rate())) return profile.max_rate();
    for (std::size_t s = 0; s + 1 < profile.rate_grid.size(); ++s) {
        const double a = profile.rate_grid[s];
        const double b = profile.rate_grid[s + 1];
        const double ra = rc_at(a);
        const double rb = rc_at(b);
        if (target_rc >= ra && target_rc <= rb) {
            if (rb == ra) return b;
            return a + (b - a) * (target_rc - ra) / (rb - ra);
        }
    }
    return profile.max_rate();
}

}  // namespace detail

inline ProtectionPlan finalize_plan(Scheme scheme, double r_s, const std::array<int, 3>& k, double target_rc,
                                    double lambda, const CodestreamProfile& profile, const LossPmf& pmf,
                                    int packet_len, bool hf_all_or_nothing) {
    ProtectionPlan plan;
    plan.scheme = scheme;
    plan.n = pmf.n;
    plan.packet_len = packet_len;
    plan.r_s = r_s;
    plan.k = k;
    plan.r_c_target = target_rc;
    plan.lambda = lambda;
    plan.layout = frame_layout_for(profile, r_s, k, pmf.n, packet_len);
    plan.r_c = channel_rate(profile, r_s, k, pmf.n);
    ChannelDistortionModel model(pmf, profile, plan.layout.block_count(), hf_all_or_nothing);
    plan.expected_mse = scheme == Scheme::eep ? expected_eep_distortion(r_s, k[0], profile, model)
                                              : expected_total_distortion(r_s, k, profile, model);
    return plan;
}

// Jointly select the source rate and the per-class code dimensions for a
// channel budget: outer bisection on the multiplier, inner two-step
// alternation, and a final budget-tightening move along the rate curve.
inline ProtectionPlan solve_uep(double target_rc, const CodestreamProfile& profile, const LossPmf& pmf,
                                int packet_len, bool hf_all_or_nothing = false, UepSolveOptions opt = {}) {
    const int n = pmf.n;
    if (target_rc < profile.min_rate() * (1.0 - opt.tol))
        throw SolverError("solve_uep: target channel rate " + std::to_string(target_rc) +
                          " below the minimum achievable rate " + std::to_string(profile.min_rate()));

    const auto eval = [&](double lambda) {
        ChannelDistortionModel model(pmf, profile, 1, hf_all_or_nothing);
        return detail::inner_solve(lambda, profile, model, packet_len, opt);
    };

    double lo = opt.lambda_lo;
    double hi = opt.lambda_hi;
    auto it_lo = eval(lo);
    auto it_hi = eval(hi);
    std::vector<std::pair<double, double>> trace = {{lo, it_lo.r_c}, {hi, it_hi.r_c}};

    if (it_lo.r_c > target_rc) {
        for (int i = 0; i < opt.max_outer; ++i) {
            const double mid = std::exp(0.5 * (std::log(lo) + std::log(hi)));
            const auto it_mid = eval(mid);
            trace.emplace_back(mid, it_mid.r_c);
            if (it_mid.r_c > target_rc) {
                lo = mid;
                it_lo = it_mid;
            } else {
                hi = mid;
                it_hi = it_mid;
            }
        }
    }

    // Bisection validity: realized rate must be nonincreasing in lambda.
    std::sort(trace.begin(), trace.end());
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
        if (trace[i].second < trace[i + 1].second - 0.05 * (std::abs(trace[i].second) + 1.0)) {
            std::ostringstream os;
            os << "solve_uep: realized rate not monotone in lambda: rc(" << trace[i].first << ")=" << trace[i].second
               << " < rc(" << trace[i + 1].first << ")=" << trace[i + 1].second;
            throw SolverError(os.str());
        }
    }

    // Candidate plans: the feasible bisection endpoint plus budget-tightened
    // variants of both endpoint protection vectors.
    std::vector<ProtectionPlan> candidates;
    const auto add_candidate = [&](double r_s, const std::array<int, 3>& k, double lambda) {
        candidates.push_back(
            finalize_plan(Scheme::uep, r_s, k, target_rc, lambda, profile, pmf, packet_len, hf_all_or_nothing));
    };
    add_candidate(it_hi.r_s, it_hi.k, hi);
    add_candidate(detail::rate_for_budget(profile, it_hi.k, n, target_rc), it_hi.k, hi);
    add_candidate(detail::rate_for_budget(profile, it_lo.k, n, target_rc), it_lo.k, lo);

    const ProtectionPlan* best = nullptr;
    for (const auto& plan : candidates) {
        if (plan.r_c > target_rc * (1.0 + opt.tol)) continue;
        if (!best || plan.expected_mse < best->expected_mse) best = &plan;
    }
    if (!best) {
        std::ostringstream os;
        os << "solve_uep: no feasible plan within tolerance; last iterate lambda=" << hi << " r_s=" << it_hi.r_s
           << " K=[" << it_hi.k[0] << "," << it_hi.k[1] << "," << it_hi.k[2] << "] rc=" << it_hi.r_c << " target="
           << target_rc;
        throw SolverError(os.str());
    }

    ProtectionPlan plan = *best;

    // Polish: budget tightening moved r_s after K was chosen, so re-run the
    // K step at the final rate until the pair is self-consistent. Keeps the
    // discrete stationarity conditions exact at the returned plan.
    for (int round = 0; round < 8; ++round) {
        ChannelDistortionModel model(pmf, profile, plan.block_count(), hf_all_or_nothing);
        const auto k_next = solve_k_given_lambda(plan.lambda, plan.r_s, profile, model);
        if (k_next == plan.k) break;
        const double r_next = detail::rate_for_budget(profile, k_next, n, target_rc);
        const auto cand =
            finalize_plan(Scheme::uep, r_next, k_next, target_rc, plan.lambda, profile, pmf, packet_len,
                          hf_all_or_nothing);
        if (cand.r_c > target_rc * (1.0 + opt.tol) || cand.expected_mse > plan.expected_mse * (1.0 + 1e-9)) break;
        plan = cand;
    }

    const bool at_max_rate = plan.r_s >= profile.max_rate();
    if (std::abs(plan.r_c - target_rc) > opt.tol * target_rc && !at_max_rate) {
        std::ostringstream os;
        os << "solve_uep: converged plan misses the budget: rc=" << plan.r_c << " target=" << target_rc;
        throw SolverError(os.str());
    }
    return plan;
}

// Equal protection: exhaustive scan of the single code dimension, minimizing
// D_S(R_C K/N) plus the frame-drop penalty. Ties prefer the larger K.
inline ProtectionPlan solve_eep(double target_rc, const CodestreamProfile& profile, const LossPmf& pmf,
                                int packet_len, bool hf_all_or_nothing = false) {
    const int n = pmf.n;
    if (target_rc < profile.min_rate())
        throw SolverError("solve_eep: target channel rate below the minimum achievable rate");
    ChannelDistortionModel model(pmf, profile, 1, hf_all_or_nothing);
    int best_k = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    double best_rs = 0.0;
    for (int k = n; k >= 1; --k) {
        double r_s = target_rc * k / n;
        if (r_s < profile.min_rate()) continue;  // cannot encode below the profile floor
        r_s = std::min(r_s, profile.max_rate());
        model.block_count =
            frame_layout_for(profile, r_s, {k, k, k}, n, packet_len).block_count();
        const double obj = expected_eep_distortion(r_s, k, profile, model);
        if (obj < best_obj) {
            best_obj = obj;
            best_k = k;
            best_rs = r_s;
        }
    }
    if (best_k < 0) throw SolverError("solve_eep: no feasible K");
    return finalize_plan(Scheme::eep, best_rs, {best_k, best_k, best_k}, target_rc, 0.0, profile, pmf, packet_len,
                         hf_all_or_nothing);
}

// No parity at all: the whole budget goes to source bytes.
inline ProtectionPlan unprotected_plan(double target_rc, const CodestreamProfile& profile, const LossPmf& pmf,
                                       int packet_len, bool hf_all_or_nothing = false) {
    const int n = pmf.n;
    const double r_s = std::clamp(target_rc, profile.min_rate(), profile.max_rate());
    return finalize_plan(Scheme::unprotected, r_s, {n, n, n}, target_rc, 0.0, profile, pmf, packet_len,
                         hf_all_or_nothing);
}

}  // namespace uep
