#pragma once

#include <array>
#include <cstdint>

namespace uep::gf {

// GF(256) with reduction polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11D),
// primitive element alpha = 2. The exp table is duplicated so that
// exp[log a + log b] never needs a modulo.
inline constexpr std::uint16_t kReductionPoly = 0x11D;

struct Tables {
    std::array<std::uint8_t, 512> exp{};
    std::array<std::uint8_t, 256> log{};  // log[0] is undefined, kept at 0
};

consteval Tables build_tables() {
    Tables t{};
    std::uint16_t x = 1;
    for (int i = 0; i < 255; ++i) {
        t.exp[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(x);
        t.log[x] = static_cast<std::uint8_t>(i);
        x = static_cast<std::uint16_t>(x << 1);
        if (x & 0x100) x ^= kReductionPoly;
    }
    for (int i = 255; i < 512; ++i) t.exp[static_cast<std::size_t>(i)] = t.exp[static_cast<std::size_t>(i - 255)];
    return t;
}

inline constexpr Tables kTables = build_tables();

[[nodiscard]] constexpr std::uint8_t add(std::uint8_t a, std::uint8_t b) { return a ^ b; }

[[nodiscard]] constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
    if (a == 0 || b == 0) return 0;
    return kTables.exp[static_cast<std::size_t>(kTables.log[a]) + kTables.log[b]];
}

// alpha^e for any non-negative exponent.
[[nodiscard]] constexpr std::uint8_t pow_alpha(unsigned e) { return kTables.exp[e % 255]; }

// Multiplicative inverse; a must be nonzero.
[[nodiscard]] constexpr std::uint8_t inv(std::uint8_t a) {
    return kTables.exp[static_cast<std::size_t>(255 - kTables.log[a])];
}

// a / b; b must be nonzero.
[[nodiscard]] constexpr std::uint8_t div(std::uint8_t a, std::uint8_t b) {
    if (a == 0) return 0;
    return kTables.exp[static_cast<std::size_t>(kTables.log[a]) + 255 - kTables.log[b]];
}

}  // namespace uep::gf
