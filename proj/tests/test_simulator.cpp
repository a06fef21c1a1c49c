#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "uep/simulator.hpp"

using namespace uep;

namespace {

CodestreamProfile default_profile() {
    static const CodestreamProfile p = load_profile(UEP_DATA_DIR "/default_profile.json");
    return p;
}

}  // namespace

TEST_CASE("psnr reference values") {
    CHECK(psnr(65025.0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(psnr(9000.0) == Catch::Approx(8.58838).margin(1e-4));
    CHECK(psnr(4500.0) - psnr(9000.0) == Catch::Approx(3.0103).margin(1e-4));
    CHECK(psnr(0.0) == 99.0);
    CHECK(psnr(0.0, 60.0) == 60.0);
}

TEST_CASE("run_trial decode policies") {
    const auto profile = default_profile();
    const auto pmf = block_loss_pmf(fit_gilbert({ChannelKind::gilbert, 0.05, 20.0}), 255);
    auto plan = solve_uep(400000.0, profile, pmf, 1500);
    const int blocks = plan.block_count();
    REQUIRE(blocks >= 1);

    // Zero losses: source distortion only.
    std::vector<int> counts(static_cast<std::size_t>(blocks), 0);
    auto out = run_trial(plan, profile, counts);
    CHECK(out.frame_decoded);
    CHECK(out.mse == Catch::Approx(source_distortion(profile, plan.r_s)));

    // All packets lost: the frame is dropped at delta_all.
    std::fill(counts.begin(), counts.end(), 255);
    out = run_trial(plan, profile, counts);
    CHECK(!out.frame_decoded);
    CHECK(out.mse == profile.delta_all);

    // One block loses just beyond the LF budget while the critical and HF
    // classes still hold.
    const int j = 255 - plan.k[1] + 1;
    REQUIRE(j <= 255 - plan.k[0]);  // critical class still recoverable
    std::fill(counts.begin(), counts.end(), 0);
    counts[0] = j;
    out = run_trial(plan, profile, counts);
    REQUIRE(out.frame_decoded);
    const double w0 = static_cast<double>(plan.layout.blocks[0].payload_bytes[kClassLfData]);
    double wsum = 0.0;
    for (const auto& b : plan.layout.blocks) wsum += static_cast<double>(b.payload_bytes[kClassLfData]);
    const double frac = w0 * (static_cast<double>(j) / 255.0) / wsum;
    const double hf = plan.k[2] >= 255 - j + 1 ? profile.delta_hf * (1.0 / blocks) : 0.0;
    CHECK(out.mse == Catch::Approx(source_distortion(profile, plan.r_s) + 100.0 * profile.delta * frac + hf));
}

TEST_CASE("eep decode policy is all-or-nothing") {
    const auto profile = default_profile();
    const auto pmf = block_loss_pmf(fit_gilbert({ChannelKind::gilbert, 0.05, 20.0}), 255);
    const auto plan = solve_eep(400000.0, profile, pmf, 1500);
    std::vector<int> counts(static_cast<std::size_t>(plan.block_count()), 0);
    auto out = run_trial(plan, profile, counts);
    CHECK(out.frame_decoded);
    CHECK(out.mse == Catch::Approx(source_distortion(profile, plan.r_s)));

    counts[0] = 255 - plan.k[0] + 1;
    out = run_trial(plan, profile, counts);
    CHECK(!out.frame_decoded);
    CHECK(out.mse == profile.delta_all);
}

TEST_CASE("fast path and byte path agree on random trials") {
    const auto profile = default_profile();
    const auto params = fit_gilbert({ChannelKind::gilbert, 0.05, 20.0});
    const auto pmf = block_loss_pmf(params, 255);
    const auto plan = solve_uep(300000.0, profile, pmf, 1500);

    for (int t = 0; t < 20; ++t) {
        const auto masks = sample_frame_masks(plan.layout, params, 1000 + static_cast<std::uint64_t>(t), false);
        std::vector<int> counts;
        for (const auto& m : masks) {
            int j = 0;
            for (auto v : m) j += (v != 0);
            counts.push_back(j);
        }
        const auto fast = run_trial(plan, profile, counts);
        const auto byte = run_trial_bytes(plan, profile, masks, uep::detail::payload_seed(1, t));
        REQUIRE(fast == byte);
    }
}

TEST_CASE("experiment is deterministic") {
    ExperimentConfig cfg;
    cfg.profile = default_profile();
    cfg.channel = {ChannelKind::gilbert, 0.05, 20.0};
    cfg.targets_rc = {400000.0};
    cfg.schemes = {Scheme::uep, Scheme::eep};
    cfg.trials = 200;
    cfg.base_seed = 7;

    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].mean_mse == b.rows[i].mean_mse);
        CHECK(a.rows[i].stderr_mse == b.rows[i].stderr_mse);
        CHECK(a.rows[i].decoded_ratio == b.rows[i].decoded_ratio);
        CHECK(a.rows[i].mean_psnr_all == b.rows[i].mean_psnr_all);
    }
}

TEST_CASE("lossless experiment reproduces the source distortion exactly") {
    ExperimentConfig cfg;
    cfg.profile = default_profile();
    cfg.channel = {ChannelKind::gilbert, 0.0, 20.0};
    cfg.targets_rc = {400000.0};
    cfg.schemes = {Scheme::uep, Scheme::eep, Scheme::unprotected};
    cfg.trials = 50;
    const auto report = run_experiment(cfg);
    for (const auto& row : report.rows) {
        CHECK(row.decoded_ratio == 1.0);
        CHECK(row.mean_mse == Catch::Approx(source_distortion(cfg.profile, row.plan.r_s)).epsilon(1e-12));
    }
}

TEST_CASE("monte carlo mean stays within three standard errors of the model") {
    // Needs enough trials that the rare frame-drop and LF-overflow events
    // actually fire; otherwise the sample stderr understates the true sigma.
    ExperimentConfig cfg;
    cfg.profile = default_profile();
    cfg.channel = {ChannelKind::gilbert, 0.05, 20.0};
    cfg.targets_rc = {400000.0};
    cfg.schemes = {Scheme::uep, Scheme::eep};
    cfg.trials = 10000;
    cfg.base_seed = 11;
    const auto report = run_experiment(cfg);
    for (const auto& row : report.rows)
        CHECK(std::abs(row.mean_mse - row.plan.expected_mse) <= 3.0 * row.stderr_mse + 1e-9);
}

TEST_CASE("unprotected transmission loses to both protected schemes") {
    ExperimentConfig cfg;
    cfg.profile = default_profile();
    cfg.schemes = {Scheme::uep, Scheme::eep, Scheme::unprotected};
    cfg.trials = 1000;
    cfg.base_seed = 3;
    for (double plr : {0.01, 0.05, 0.10}) {
        cfg.channel = {ChannelKind::gilbert, plr, 20.0};
        for (double rc : {100000.0, 400000.0, 800000.0}) {
            cfg.targets_rc = {rc};
            const auto report = run_experiment(cfg);
            const auto& uep_row = report.rows[0];
            const auto& eep_row = report.rows[1];
            const auto& unp_row = report.rows[2];
            INFO("plr=" << plr << " rc=" << rc);
            REQUIRE(unp_row.mean_psnr_all < uep_row.mean_psnr_all);
            REQUIRE(unp_row.mean_psnr_all < eep_row.mean_psnr_all);
            REQUIRE(uep_row.mean_mse < unp_row.mean_mse);
            REQUIRE(uep_row.mean_mse <= eep_row.mean_mse);
        }
    }
}
