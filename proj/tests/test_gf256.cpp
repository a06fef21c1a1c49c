#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "uep/gf256.hpp"

using namespace uep;

TEST_CASE("gf256 table invariants") {
    for (int a = 1; a < 256; ++a) {
        const auto v = static_cast<std::uint8_t>(a);
        CHECK(gf::kTables.exp[gf::kTables.log[v]] == v);
        CHECK(gf::mul(v, gf::inv(v)) == 1);
    }
}

TEST_CASE("gf256 known products") {
    for (int x = 0; x < 256; ++x) {
        CHECK(gf::mul(0, static_cast<std::uint8_t>(x)) == 0);
        CHECK(gf::mul(1, static_cast<std::uint8_t>(x)) == x);
    }
    // 0x80 * 2 shifts into the reduction: 0x100 ^ 0x11D = 0x1D.
    CHECK(gf::mul(0x80, 0x02) == 0x1D);
    CHECK(gf::mul(0x02, 0x80) == 0x1D);
}

TEST_CASE("gf256 field axioms on random triples") {
    std::mt19937_64 rng(12345);
    for (int i = 0; i < 10000; ++i) {
        const auto a = static_cast<std::uint8_t>(rng());
        const auto b = static_cast<std::uint8_t>(rng());
        const auto c = static_cast<std::uint8_t>(rng());
        REQUIRE(gf::mul(a, b) == gf::mul(b, a));
        REQUIRE(gf::mul(gf::mul(a, b), c) == gf::mul(a, gf::mul(b, c)));
        REQUIRE(gf::mul(a, gf::add(b, c)) == gf::add(gf::mul(a, b), gf::mul(a, c)));
    }
}

TEST_CASE("gf256 division and powers") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 1000; ++i) {
        const auto a = static_cast<std::uint8_t>(rng());
        auto b = static_cast<std::uint8_t>(rng());
        if (b == 0) b = 1;
        CHECK(gf::mul(gf::div(a, b), b) == a);
    }
    CHECK(gf::pow_alpha(0) == 1);
    CHECK(gf::pow_alpha(1) == 2);
    CHECK(gf::pow_alpha(255) == 1);
    CHECK(gf::pow_alpha(510) == 1);
}
