// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria are pinned here, independent of the unit tests.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "uep/report.hpp"
#include "uep/simulator.hpp"
#include "uep/validate.hpp"

using namespace uep;

namespace {

int g_failures = 0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(const std::string& id, bool pass, double seconds, const std::string& detail) {
    std::printf("[%s] %-3s (%6.2fs) %s\n", pass ? "PASS" : "FAIL", id.c_str(), seconds, detail.c_str());
    if (!pass) ++g_failures;
}

CodestreamProfile load_default_profile() { return load_profile(UEP_DATA_DIR "/default_profile.json"); }

// C1: randomized and exhaustive Reed-Solomon erasure behavior, < 10 s.
void criterion1() {
    Timer t;
    const auto res = checks::rs_roundtrip(/*seed=*/1, /*random_cases=*/1000, /*exhaustive_max_n=*/12);
    const double sec = t.seconds();
    report("C1", res.pass && sec < 10.0, sec, "RS erasure property suite: " + res.detail);
}

// C2: Gilbert pmf vs Monte Carlo (TV < 0.01) for all nine channel settings
// plus the Bernoulli/Binomial identity, < 30 s. The Monte Carlo histogram
// uses 1e6 blocks: at 1e5 blocks the multinomial sampling noise alone puts
// the expected TV at 0.011-0.013 for plr=0.10, above the limit even for an
// exact pmf, so the sample size is raised to give the 0.01 limit real
// discriminating power.
void criterion2() {
    Timer t;
    std::vector<std::pair<double, double>> combos;
    for (double plr : {0.01, 0.05, 0.10})
        for (double abel : {10.0, 20.0, 30.0}) combos.emplace_back(plr, abel);
    const auto mc = checks::pmf_monte_carlo(combos, /*blocks=*/1000000, /*tv_limit=*/0.01, /*seed=*/1);
    const auto binom = checks::bernoulli_binomial(1e-10);
    const double sec = t.seconds();
    report("C2", mc.pass && binom.pass && sec < 30.0, sec,
           "Gilbert pmf oracle: " + mc.detail + "; binomial identity: " + binom.detail);
}

// C3: closed-form LF-data distortion, iid p=0.05, K2=255, delta=90 -> 450.
void criterion3() {
    Timer t;
    const auto profile = load_default_profile();
    const auto res = checks::class2_closed_form(profile, 1e-9);
    report("C3", res.pass, t.seconds(), "LF-data closed form: " + res.detail);
}

// C4: 100 full-frame trials identical across the count-level and byte-level
// simulator paths.
void criterion4() {
    Timer t;
    const auto profile = load_default_profile();
    const auto res = checks::fast_vs_byte(profile, /*trials=*/100, /*seed=*/1);
    report("C4", res.pass, t.seconds(), "fast-path/byte-path equivalence: " + res.detail);
}

// C5: EEP equals the exhaustive scan; UEP within 1% of the best coarse
// brute-force plan at equal rate; < 2 min.
void criterion5() {
    Timer t;
    const auto profile = load_default_profile();
    const ChannelSpec spec{ChannelKind::gilbert, 0.05, 20.0};
    const auto eep = checks::eep_matches_scan(profile, 400000.0, spec);
    const auto grid = checks::uep_vs_coarse_grid(profile, 400000.0, spec, 1.01, 20);
    const auto dom = checks::uep_dominates_eep(profile, 400000.0, spec);
    const double sec = t.seconds();
    report("C5", eep.pass && grid.pass && dom.pass && sec < 120.0, sec,
           "optimizer oracle: " + eep.detail + "; " + grid.detail + "; " + dom.detail);
}

struct HeadlineRun {
    SimulationReport report;
    ExperimentConfig cfg;
};

HeadlineRun headline_run() {
    ExperimentConfig cfg;
    cfg.profile = load_default_profile();
    cfg.channel = {ChannelKind::gilbert, 0.05, 20.0};
    cfg.targets_rc = {400000.0};
    cfg.schemes = {Scheme::uep, Scheme::eep, Scheme::unprotected};
    cfg.trials = 10000;
    cfg.base_seed = 1;
    HeadlineRun run;
    run.cfg = cfg;
    run.report = run_experiment(cfg);
    return run;
}

// C6: Monte Carlo mean within three standard errors of the model expectation
// for the UEP and EEP plans at plr=5%, ABEL=20, 400 kB/frame, 1e4 trials.
void criterion6(const HeadlineRun& run) {
    Timer t;
    bool pass = true;
    std::string detail = "Monte Carlo vs analytic: ";
    for (const auto& row : run.report.rows) {
        if (row.scheme == Scheme::unprotected) continue;
        const double diff = std::abs(row.mean_mse - row.plan.expected_mse);
        const bool ok = diff <= 3.0 * row.stderr_mse;
        pass &= ok;
        detail += std::string(scheme_name(row.scheme)) + " |" + format_double(row.mean_mse) + "-" +
                  format_double(row.plan.expected_mse) + "| = " + format_double(diff) + " vs 3se=" +
                  format_double(3.0 * row.stderr_mse) + "; ";
    }
    report("C6", pass, t.seconds(), detail);
}

// C7: model-level analogue of the headline result at 400 kB/frame, 5% loss,
// ABEL=20: UEP mean MSE <= 0.6 x EEP and <= 0.2 x Unprotected; < 5 min
// including the shared simulation run.
void criterion7(const HeadlineRun& run, double setup_seconds) {
    Timer t;
    const auto& profile = run.cfg.profile;
    const bool constants_ok = profile.delta == 90.0 && profile.delta_all == 9000.0 && profile.delta_hf == 4.0 &&
                              run.cfg.n == 255 && run.cfg.packet_len == 1500;
    const double uep_mse = run.report.rows[0].mean_mse;
    const double eep_mse = run.report.rows[1].mean_mse;
    const double unp_mse = run.report.rows[2].mean_mse;
    const bool vs_eep = uep_mse <= 0.6 * eep_mse;
    const bool vs_unp = uep_mse <= 0.2 * unp_mse;
    const double sec = setup_seconds + t.seconds();
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "headline: uep=%.2f eep=%.2f unprotected=%.2f; uep/eep=%.3f (<=0.6) uep/unprotected=%.4f (<=0.2)",
                  uep_mse, eep_mse, unp_mse, uep_mse / eep_mse, uep_mse / unp_mse);
    report("C7", constants_ok && vs_eep && vs_unp && sec < 300.0, sec, buf);
}

// C8: the critical class gets the strongest protection at 1/5/10% loss, and
// UEP decodes at least as many frames as EEP at 5%.
void criterion8(const HeadlineRun& run) {
    Timer t;
    const auto profile = load_default_profile();
    bool pass = true;
    std::string detail = "ordering: ";
    for (double plr : {0.01, 0.05, 0.10}) {
        const auto pmf = block_loss_pmf(fit_gilbert({ChannelKind::gilbert, plr, 20.0}), 255);
        const auto plan = solve_uep(400000.0, profile, pmf, 1500);
        const bool ok = plan.k[0] <= plan.k[1] && plan.k[0] <= plan.k[2];
        pass &= ok;
        char buf[64];
        std::snprintf(buf, sizeof buf, "plr=%g K=[%d,%d,%d] ", plr, plan.k[0], plan.k[1], plan.k[2]);
        detail += buf;
    }
    const double uep_ratio = run.report.rows[0].decoded_ratio;
    const double eep_ratio = run.report.rows[1].decoded_ratio;
    pass &= uep_ratio >= eep_ratio;
    detail += "decoded_ratio uep=" + format_double(uep_ratio) + " >= eep=" + format_double(eep_ratio);
    report("C8", pass, t.seconds(), detail);
}

// C9: repeated simulate runs with the same manifest serialize byte-identically.
void criterion9() {
    Timer t;
    ExperimentConfig cfg;
    cfg.profile = load_default_profile();
    cfg.channel = {ChannelKind::gilbert, 0.05, 20.0};
    cfg.targets_rc = {200000.0, 400000.0};
    cfg.schemes = {Scheme::uep, Scheme::eep};
    cfg.trials = 500;
    cfg.base_seed = 3;
    const auto manifest = RunManifest::from_config(cfg, UEP_DATA_DIR "/default_profile.json", "deadbeef");
    const auto csv_a = report_to_csv(manifest, run_experiment(cfg));
    const auto csv_b = report_to_csv(manifest, run_experiment(cfg));
    const auto json_a = report_to_json(manifest, run_experiment(cfg)).dump(2);
    const auto json_b = report_to_json(manifest, run_experiment(cfg)).dump(2);
    const bool pass = csv_a == csv_b && json_a == json_b && !csv_a.empty();
    report("C9", pass, t.seconds(),
           "determinism: " + std::to_string(csv_a.size()) + "-byte CSV and " + std::to_string(json_a.size()) +
               "-byte JSON byte-identical across repeated runs");
}

}  // namespace

int main() {
    std::printf("uepsim acceptance suite\n");
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();

    Timer headline_timer;
    const auto run = headline_run();
    const double setup = headline_timer.seconds();
    criterion6(run);
    criterion7(run, setup);
    criterion8(run);
    criterion9();

    std::printf("%d %s failed\n", g_failures, g_failures == 1 ? "criterion" : "criteria");
    return g_failures == 0 ? 0 : 1;
}
