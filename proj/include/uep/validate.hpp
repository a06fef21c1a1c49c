#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "uep/optimizer.hpp"
#include "uep/report.hpp"
#include "uep/simulator.hpp"

namespace uep {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace checks {

namespace detail {

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, int len) {
    std::vector<std::uint8_t> v(static_cast<std::size_t>(len));
    for (auto& b : v) b = static_cast<std::uint8_t>(rng());
    return v;
}

}  // namespace detail

// Randomized erasure round-trips at and below the correction budget, failure
// reports just above it, plus an exhaustive sweep of all erasure patterns for
// short codes.
inline CheckResult rs_roundtrip(std::uint64_t seed, int random_cases, int exhaustive_max_n) {
    detail::Timer timer;
    std::mt19937_64 rng(seed);
    std::ostringstream why;
    bool ok = true;

    const auto run_case = [&](const RsCode& code, const std::vector<std::uint8_t>& info,
                              const std::vector<std::uint8_t>& mask, int erasures) {
        auto cw = rs_encode(code, info);
        for (std::size_t i = 0; i < cw.size(); ++i)
            if (mask[i]) cw[i] = 0xEE;
        const auto res = rs_decode_erasures(code, cw, mask);
        if (erasures <= code.parity()) {
            if (!res.recovered || res.info != info) {
                ok = false;
                why << "recoverable case failed at n=" << code.n << " k=" << code.k << " e=" << erasures << "; ";
                return false;
            }
        } else if (res.recovered) {
            ok = false;
            why << "case beyond the Singleton bound reported success at n=" << code.n << " k=" << code.k << "; ";
            return false;
        }
        return true;
    };

    for (int i = 0; i < random_cases && ok; ++i) {
        const int n = 1 + static_cast<int>(rng() % 255);
        const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(n));
        const RsCode code(n, k);
        const auto info = detail::random_bytes(rng, k);
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);

        const int budget = n - k;
        const int e = budget > 0 ? static_cast<int>(rng() % static_cast<unsigned>(budget + 1)) : 0;
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
        for (int m = 0; m < e; ++m) mask[static_cast<std::size_t>(idx[static_cast<std::size_t>(m)])] = 1;
        run_case(code, info, mask, e);

        // One past the budget, when representable.
        if (budget + 1 <= n) {
            std::fill(mask.begin(), mask.end(), 0);
            for (int m = 0; m < budget + 1; ++m) mask[static_cast<std::size_t>(idx[static_cast<std::size_t>(m)])] = 1;
            run_case(code, info, mask, budget + 1);
        }
    }

    long exhaustive = 0;
    for (int n = 1; n <= exhaustive_max_n && ok; ++n) {
        for (int k = 1; k <= n && ok; ++k) {
            const RsCode code(n, k);
            const auto info = detail::random_bytes(rng, k);
            for (std::uint32_t bits = 0; bits < (1u << n) && ok; ++bits) {
                const int e = std::popcount(bits);
                if (e > n - k + 1) continue;
                std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
                for (int i = 0; i < n; ++i)
                    if (bits & (1u << i)) mask[static_cast<std::size_t>(i)] = 1;
                run_case(code, info, mask, e);
                ++exhaustive;
            }
        }
    }

    CheckResult res;
    res.name = "rs_roundtrip";
    res.pass = ok;
    res.seconds = timer.seconds();
    std::ostringstream d;
    d << random_cases << " randomized recover + " << random_cases << " beyond-budget cases, " << exhaustive
      << " exhaustive patterns (n <= " << exhaustive_max_n << ")";
    if (!ok) d << " -- " << why.str();
    res.detail = d.str();
    return res;
}

// Compare the dynamic-programming pmf against a Monte Carlo histogram of
// independently sampled stationary blocks.
inline CheckResult pmf_monte_carlo(const std::vector<std::pair<double, double>>& combos, long blocks,
                                   double tv_limit, std::uint64_t seed, int n = 255) {
    detail::Timer timer;
    bool ok = true;
    std::ostringstream d;
    for (const auto& [plr, abel] : combos) {
        const auto params = fit_gilbert({ChannelKind::gilbert, plr, abel});
        const auto pmf = block_loss_pmf(params, n);
        std::vector<double> hist(static_cast<std::size_t>(n) + 1, 0.0);
        LossSampler s(params, seed);
        const double w = 1.0 / static_cast<double>(blocks);
        for (long b = 0; b < blocks; ++b) {
            s.reset_stationary();
            int j = 0;
            for (int i = 0; i < n; ++i) j += s.next();
            hist[static_cast<std::size_t>(j)] += w;
        }
        double tv = 0.0;
        for (int j = 0; j <= n; ++j)
            tv += std::abs(hist[static_cast<std::size_t>(j)] - pmf.p[static_cast<std::size_t>(j)]);
        tv /= 2.0;
        d << "plr=" << plr << "/abel=" << abel << " tv=" << tv << " ";
        if (!(tv < tv_limit)) ok = false;
    }
    CheckResult res;
    res.name = "pmf_vs_monte_carlo";
    res.pass = ok;
    res.seconds = timer.seconds();
    res.detail = d.str() + "(limit " + std::to_string(tv_limit) + ", " + std::to_string(blocks) + " blocks)";
    return res;
}

inline CheckResult bernoulli_binomial(double tol, int n = 255) {
    detail::Timer timer;
    bool ok = true;
    double worst = 0.0;
    for (double p : {0.01, 0.05, 0.10}) {
        const auto pmf = block_loss_pmf(fit_gilbert({ChannelKind::bernoulli, p, 1.0}), n);
        // Closed-form binomial via the multiplicative recurrence.
        std::vector<double> ref(static_cast<std::size_t>(n) + 1);
        ref[0] = std::pow(1.0 - p, n);
        for (int j = 1; j <= n; ++j)
            ref[static_cast<std::size_t>(j)] =
                ref[static_cast<std::size_t>(j - 1)] * (static_cast<double>(n - j + 1) / j) * (p / (1.0 - p));
        for (int j = 0; j <= n; ++j) {
            const double err = std::abs(pmf.p[static_cast<std::size_t>(j)] - ref[static_cast<std::size_t>(j)]);
            worst = std::max(worst, err);
            if (err > tol) ok = false;
        }
    }
    CheckResult res;
    res.name = "bernoulli_vs_binomial";
    res.pass = ok;
    res.seconds = timer.seconds();
    res.detail = "max per-entry error " + format_scientific(worst) + " (limit " + format_scientific(tol) + ")";
    return res;
}

inline CheckResult class2_closed_form(const CodestreamProfile& profile, double tol) {
    detail::Timer timer;
    const double p = 0.05;
    const auto pmf = block_loss_pmf(fit_gilbert({ChannelKind::bernoulli, p, 1.0}), 255);
    ChannelDistortionModel model(pmf, profile);
    const double via_model = dc_class(kClassLfData, 255, model);
    // Direct summation of 100 (j/n) delta p(j) over the whole support; with
    // K = n this is 100 * delta * E[Y]/n = 100 * delta * p.
    double direct = 0.0;
    for (int j = 255; j >= 1; --j)
        direct += 100.0 * (static_cast<double>(j) / 255.0) * profile.delta * pmf.p[static_cast<std::size_t>(j)];
    const double closed = 100.0 * profile.delta * p;
    const double err = std::max(std::abs(via_model - closed), std::abs(direct - closed));
    CheckResult res;
    res.name = "class2_closed_form";
    res.pass = err <= tol;
    res.seconds = timer.seconds();
    res.detail = "model " + format_double(via_model) + ", summation " + format_double(direct) + ", closed form " +
                 format_double(closed) + ", err " + format_scientific(err);
    return res;
}

// Count-level and byte-level simulator paths must produce identical outcomes.
inline CheckResult fast_vs_byte(const CodestreamProfile& profile, int trials, std::uint64_t seed) {
    detail::Timer timer;
    const auto spec = ChannelSpec{ChannelKind::gilbert, 0.05, 20.0};
    const auto params = fit_gilbert(spec);
    const auto pmf = block_loss_pmf(params, 255);
    const auto plan = solve_uep(400000.0, profile, pmf, 1500);

    bool ok = true;
    int mismatches = 0;
    for (int t = 0; t < trials; ++t) {
        const auto masks = sample_frame_masks(plan.layout, params, seed + static_cast<std::uint64_t>(t), false);
        std::vector<int> counts;
        counts.reserve(masks.size());
        for (const auto& m : masks) {
            int j = 0;
            for (auto v : m) j += (v != 0);
            counts.push_back(j);
        }
        const auto fast = run_trial(plan, profile, counts);
        const auto byte = run_trial_bytes(plan, profile, masks, uep::detail::payload_seed(seed, t));
        if (!(fast == byte)) {
            ok = false;
            ++mismatches;
        }
    }
    CheckResult res;
    res.name = "fast_vs_byte_path";
    res.pass = ok;
    res.seconds = timer.seconds();
    res.detail = std::to_string(trials) + " full-frame trials, " + std::to_string(mismatches) + " mismatches";
    return res;
}

inline CheckResult eep_matches_scan(const CodestreamProfile& profile, double target, const ChannelSpec& spec) {
    detail::Timer timer;
    const auto pmf = block_loss_pmf(fit_gilbert(spec), 255);
    const auto plan = solve_eep(target, profile, pmf, 1500);

    int best_k = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 255; k >= 1; --k) {
        double r_s = target * k / 255.0;
        if (r_s < profile.min_rate()) continue;
        r_s = std::min(r_s, profile.max_rate());
        const int blocks = frame_layout_for(profile, r_s, {k, k, k}, 255, 1500).block_count();
        ChannelDistortionModel m(pmf, profile, blocks);
        const double obj = expected_eep_distortion(r_s, k, profile, m);
        if (obj < best) {
            best = obj;
            best_k = k;
        }
    }
    CheckResult res;
    res.name = "eep_exhaustive_scan";
    res.pass = plan.k[0] == best_k && std::abs(plan.expected_mse - best) <= 1e-12 * std::max(1.0, best);
    res.seconds = timer.seconds();
    res.detail = "solver K=" + std::to_string(plan.k[0]) + ", scan K=" + std::to_string(best_k);
    return res;
}

// The iterative solver must not lose more than the stated headroom against a
// coarse brute-force grid evaluated at (near-)equal channel rate.
inline CheckResult uep_vs_coarse_grid(const CodestreamProfile& profile, double target, const ChannelSpec& spec,
                                      double headroom, int rate_points = 20) {
    detail::Timer timer;
    const auto pmf = block_loss_pmf(fit_gilbert(spec), 255);
    const auto plan = solve_uep(target, profile, pmf, 1500);

    double best = std::numeric_limits<double>::infinity();
    std::array<int, 7> grid{15, 55, 95, 135, 175, 215, 255};
    for (int k1 : grid)
        for (int k2 : grid)
            for (int k3 : grid)
                for (int i = 0; i < rate_points; ++i) {
                    const double r_s = profile.min_rate() +
                                       (profile.max_rate() - profile.min_rate()) * i / (rate_points - 1.0);
                    const std::array<int, 3> k{k1, k2, k3};
                    const double rc = channel_rate(profile, r_s, k, 255);
                    if (std::abs(rc - target) > 0.01 * target) continue;
                    const int blocks = frame_layout_for(profile, r_s, k, 255, 1500).block_count();
                    ChannelDistortionModel m(pmf, profile, blocks);
                    best = std::min(best, expected_total_distortion(r_s, k, profile, m));
                }
    CheckResult res;
    res.name = "uep_vs_coarse_grid";
    res.pass = plan.expected_mse <= best * headroom;
    res.seconds = timer.seconds();
    res.detail = "solver " + format_double(plan.expected_mse) + " vs grid best " + format_double(best) +
                 " (headroom x" + format_double(headroom) + ")";
    return res;
}

// Feasibility cross-check: the optimal equal-protection plan, evaluated under
// the per-class decode model, can never beat the unequal solution.
inline CheckResult uep_dominates_eep(const CodestreamProfile& profile, double target, const ChannelSpec& spec) {
    detail::Timer timer;
    const auto pmf = block_loss_pmf(fit_gilbert(spec), 255);
    const auto uep_plan = solve_uep(target, profile, pmf, 1500);
    const auto eep_plan = solve_eep(target, profile, pmf, 1500);
    ChannelDistortionModel m(pmf, profile, eep_plan.block_count());
    const double eep_as_uep = expected_total_distortion(eep_plan.r_s, eep_plan.k, profile, m);
    CheckResult res;
    res.name = "uep_dominates_eep";
    res.pass = uep_plan.expected_mse <= eep_as_uep * 1.0001 && uep_plan.expected_mse <= eep_plan.expected_mse * 1.0001;
    res.seconds = timer.seconds();
    res.detail = "uep " + format_double(uep_plan.expected_mse) + " <= eep-under-uep-policy " +
                 format_double(eep_as_uep) + ", eep " + format_double(eep_plan.expected_mse);
    return res;
}

}  // namespace checks

struct ValidationOptions {
    bool quick = false;
    std::uint64_t seed = 1;
};

inline std::vector<CheckResult> run_validation(const CodestreamProfile& profile, const ValidationOptions& opt) {
    std::vector<CheckResult> results;
    const int rs_cases = opt.quick ? 200 : 1000;
    const int rs_exhaustive = opt.quick ? 8 : 12;
    results.push_back(checks::rs_roundtrip(opt.seed, rs_cases, rs_exhaustive));

    std::vector<std::pair<double, double>> combos;
    if (opt.quick) {
        combos = {{0.05, 20.0}};
    } else {
        for (double plr : {0.01, 0.05, 0.10})
            for (double abel : {10.0, 20.0, 30.0}) combos.emplace_back(plr, abel);
    }
    const long blocks = opt.quick ? 200000 : 1000000;
    results.push_back(checks::pmf_monte_carlo(combos, blocks, 0.01, opt.seed));
    results.push_back(checks::bernoulli_binomial(1e-10));
    results.push_back(checks::class2_closed_form(profile, 1e-9));
    results.push_back(checks::fast_vs_byte(profile, opt.quick ? 20 : 100, opt.seed));
    results.push_back(checks::eep_matches_scan(profile, 400000.0, {ChannelKind::gilbert, 0.05, 20.0}));
    results.push_back(
        checks::uep_vs_coarse_grid(profile, 400000.0, {ChannelKind::gilbert, 0.05, 20.0}, 1.01, opt.quick ? 10 : 20));
    results.push_back(checks::uep_dominates_eep(profile, 400000.0, {ChannelKind::gilbert, 0.05, 20.0}));
    return results;
}

}  // namespace uep
