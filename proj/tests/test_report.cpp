#include <catch2/catch_amalgamated.hpp>

#include "uep/report.hpp"

using namespace uep;

TEST_CASE("rate parsing") {
    CHECK(parse_rate("400k") == 400000.0);
    CHECK(parse_rate("400K") == 400000.0);
    CHECK(parse_rate("1M") == 1000000.0);
    CHECK(parse_rate("1.5M") == 1500000.0);
    CHECK(parse_rate("1500") == 1500.0);
    CHECK(parse_rate("2.5k") == 2500.0);
    CHECK_THROWS_AS(parse_rate(""), ParamError);
    CHECK_THROWS_AS(parse_rate("abc"), ParamError);
    CHECK_THROWS_AS(parse_rate("10q"), ParamError);
    CHECK_THROWS_AS(parse_rate("-5k"), ParamError);
    CHECK_THROWS_AS(parse_rate("4 00k"), ParamError);
}

TEST_CASE("fnv1a64 reference vectors") {
    // Standard FNV-1a 64-bit test vectors.
    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a64_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("csv report is deterministic and carries the manifest") {
    ExperimentConfig cfg;
    cfg.profile = load_profile(UEP_DATA_DIR "/default_profile.json");
    cfg.channel = {ChannelKind::gilbert, 0.05, 20.0};
    cfg.targets_rc = {400000.0};
    cfg.schemes = {Scheme::uep};
    cfg.trials = 50;
    cfg.base_seed = 5;

    const auto report = run_experiment(cfg);
    const auto manifest = RunManifest::from_config(cfg, "default_profile.json", "abc123");
    const auto csv_a = report_to_csv(manifest, report);
    const auto csv_b = report_to_csv(manifest, run_experiment(cfg));
    CHECK(csv_a == csv_b);

    CHECK(csv_a.find("# uepsim") != std::string::npos);
    CHECK(csv_a.find("checksum=abc123") != std::string::npos);
    CHECK(csv_a.find(kCsvHeader) != std::string::npos);
    CHECK(csv_a.find("uep,0.05,20,") != std::string::npos);
    // No timestamp unless stamped.
    CHECK(csv_a.find("timestamp") == std::string::npos);

    auto stamped = manifest;
    stamped.timestamp = "2026-01-01T00:00:00Z";
    CHECK(report_to_csv(stamped, report).find("# timestamp=2026-01-01T00:00:00Z") != std::string::npos);
}

TEST_CASE("json report round-trips through nlohmann") {
    ExperimentConfig cfg;
    cfg.profile = load_profile(UEP_DATA_DIR "/default_profile.json");
    cfg.channel = {ChannelKind::bernoulli, 0.02, 1.0};
    cfg.targets_rc = {300000.0};
    cfg.schemes = {Scheme::eep};
    cfg.trials = 20;

    const auto report = run_experiment(cfg);
    const auto manifest = RunManifest::from_config(cfg, "p.json", "00");
    const auto j = report_to_json(manifest, report);
    CHECK(j["manifest"]["channel"]["kind"] == "bernoulli");
    CHECK(j["rows"].size() == 1);
    CHECK(j["rows"][0]["plan"]["scheme"] == "eep");
    const auto dumped = j.dump(2);
    const auto reparsed = nlohmann::json::parse(dumped);
    CHECK(reparsed == j);
    // Serialization itself is deterministic.
    CHECK(report_to_json(manifest, run_experiment(cfg)).dump(2) == dumped);
}
