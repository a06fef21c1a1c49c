#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uep/errors.hpp"
#include "uep/gf256.hpp"

namespace uep {

// Systematic Reed-Solomon erasure code over GF(256). Generator roots are the
// consecutive powers alpha^0 .. alpha^(n-k-1). Codes with n < 255 are treated
// as shortened cyclic codes, which leaves encoding and erasure decoding
// unchanged. Decoding is erasure-only: positions of lost symbols are always
// known on a packet-loss channel.
struct RsCode {
    int n = 0;  // codeword length in symbols, 1..255
    int k = 0;  // information symbols, 1..n

    RsCode(int n_, int k_) : n(n_), k(k_) {
        if (n < 1 || n > 255 || k < 1 || k > n)
            throw ParamError("RsCode: invalid (n,k) = (" + std::to_string(n) + "," + std::to_string(k) + ")");
    }

    [[nodiscard]] int parity() const { return n - k; }
};

namespace detail {

// g(x) = prod_{j=0}^{t-1} (x - alpha^j), coefficients highest degree first,
// g[0] = 1. Built once for every parity count.
inline const std::vector<std::uint8_t>& generator_poly(int parity) {
    static const std::vector<std::vector<std::uint8_t>> polys = [] {
        std::vector<std::vector<std::uint8_t>> all(255);
        all[0] = {1};
        for (int t = 1; t < 255; ++t) {
            const auto& prev = all[static_cast<std::size_t>(t - 1)];
            std::vector<std::uint8_t> g(static_cast<std::size_t>(t) + 1, 0);
            const std::uint8_t root = gf::pow_alpha(static_cast<unsigned>(t - 1));
            for (std::size_t i = 0; i < prev.size(); ++i) {
                g[i] ^= prev[i];
                g[i + 1] ^= gf::mul(prev[i], root);
            }
            all[static_cast<std::size_t>(t)] = std::move(g);
        }
        return all;
    }();
    return polys[static_cast<std::size_t>(parity)];
}

// Evaluate sum_i c[i] x^(len-1-i) at x via Horner.
inline std::uint8_t eval_poly_msb(std::span<const std::uint8_t> c, std::uint8_t x) {
    std::uint8_t acc = 0;
    for (std::uint8_t v : c) acc = static_cast<std::uint8_t>(gf::mul(acc, x) ^ v);
    return acc;
}

// Evaluate an ascending-order polynomial at x.
inline std::uint8_t eval_poly_lsb(std::span<const std::uint8_t> c, std::uint8_t x) {
    std::uint8_t acc = 0;
    for (std::size_t i = c.size(); i-- > 0;) acc = static_cast<std::uint8_t>(gf::mul(acc, x) ^ c[i]);
    return acc;
}

}  // namespace detail

// Systematic encoding: first k symbols are the information bytes, followed by
// n-k parity bytes.
inline std::vector<std::uint8_t> rs_encode(const RsCode& code, std::span<const std::uint8_t> info) {
    if (static_cast<int>(info.size()) != code.k)
        throw ParamError("rs_encode: info length " + std::to_string(info.size()) + " != k " + std::to_string(code.k));
    const int t = code.parity();
    std::vector<std::uint8_t> out(static_cast<std::size_t>(code.n));
    std::copy(info.begin(), info.end(), out.begin());
    if (t == 0) return out;

    const auto& g = detail::generator_poly(t);
    std::uint8_t* par = out.data() + code.k;
    for (std::uint8_t d : info) {
        const std::uint8_t f = static_cast<std::uint8_t>(d ^ par[0]);
        for (int j = 0; j < t - 1; ++j) par[j] = par[j + 1];
        par[t - 1] = 0;
        if (f != 0) {
            for (int j = 0; j < t; ++j)
                par[j] ^= gf::mul(f, g[static_cast<std::size_t>(j) + 1]);
        }
    }
    return out;
}

struct ErasureDecodeResult {
    bool recovered = false;
    // recovered: the k information bytes. Not recovered: empty.
    std::vector<std::uint8_t> info;
    // When unrecoverable, the systematic symbols that did survive, in order,
    // together with their positions (< k). Class-2 partial decoding uses them.
    std::vector<std::uint16_t> survivor_positions;
    std::vector<std::uint8_t> survivor_bytes;
};

// Erasure-only decoding. `erased[i] != 0` marks position i as lost; the
// corresponding entries of `received` are ignored. With e erasures and
// e <= n-k the information bytes are recovered exactly (MDS); otherwise the
// result carries the surviving systematic bytes.
inline ErasureDecodeResult rs_decode_erasures(const RsCode& code, std::span<const std::uint8_t> received,
                                              std::span<const std::uint8_t> erased) {
    if (static_cast<int>(received.size()) != code.n || static_cast<int>(erased.size()) != code.n)
        throw ParamError("rs_decode_erasures: received/erased length != n");

    std::vector<int> positions;
    for (int i = 0; i < code.n; ++i)
        if (erased[static_cast<std::size_t>(i)]) positions.push_back(i);
    const int e = static_cast<int>(positions.size());

    ErasureDecodeResult res;
    if (e > code.parity()) {
        for (int i = 0; i < code.k; ++i) {
            if (!erased[static_cast<std::size_t>(i)]) {
                res.survivor_positions.push_back(static_cast<std::uint16_t>(i));
                res.survivor_bytes.push_back(received[static_cast<std::size_t>(i)]);
            }
        }
        return res;
    }

    res.recovered = true;
    res.info.assign(received.begin(), received.begin() + code.k);
    if (e == 0) return res;

    std::vector<std::uint8_t> word(received.begin(), received.end());
    for (int p : positions) word[static_cast<std::size_t>(p)] = 0;

    // e syndromes suffice for e erasures: S_j = r(alpha^j), j = 0..e-1.
    std::vector<std::uint8_t> synd(static_cast<std::size_t>(e));
    for (int j = 0; j < e; ++j)
        synd[static_cast<std::size_t>(j)] = detail::eval_poly_msb(word, gf::pow_alpha(static_cast<unsigned>(j)));

    // Erasure locator Lambda(x) = prod (1 - X_m x), ascending coefficients,
    // with X_m = alpha^(n-1-pos).
    std::vector<std::uint8_t> locators(static_cast<std::size_t>(e));
    std::vector<std::uint8_t> lambda = {1};
    lambda.reserve(static_cast<std::size_t>(e) + 1);
    for (int m = 0; m < e; ++m) {
        const std::uint8_t x_m = gf::pow_alpha(static_cast<unsigned>(code.n - 1 - positions[static_cast<std::size_t>(m)]));
        locators[static_cast<std::size_t>(m)] = x_m;
        lambda.push_back(0);
        for (std::size_t i = lambda.size() - 1; i >= 1; --i)
            lambda[i] ^= gf::mul(x_m, lambda[i - 1]);
    }

    // Omega(x) = S(x) Lambda(x) mod x^e.
    std::vector<std::uint8_t> omega(static_cast<std::size_t>(e), 0);
    for (int i = 0; i < e; ++i) {
        std::uint8_t acc = 0;
        for (int j = 0; j <= i; ++j)
            acc ^= gf::mul(synd[static_cast<std::size_t>(j)], lambda[static_cast<std::size_t>(i - j)]);
        omega[static_cast<std::size_t>(i)] = acc;
    }

    // Formal derivative: only odd-degree terms of Lambda survive in GF(2^m).
    std::vector<std::uint8_t> lambda_deriv(lambda.size() - 1, 0);
    for (std::size_t d = 1; d < lambda.size(); d += 2) lambda_deriv[d - 1] = lambda[d];

    // Forney with first consecutive root alpha^0: value = X * Omega(1/X) / Lambda'(1/X).
    for (int m = 0; m < e; ++m) {
        const std::uint8_t x_m = locators[static_cast<std::size_t>(m)];
        const std::uint8_t x_inv = gf::inv(x_m);
        const std::uint8_t num = detail::eval_poly_lsb(omega, x_inv);
        const std::uint8_t den = detail::eval_poly_lsb(lambda_deriv, x_inv);
        if (den == 0) throw Error("rs_decode_erasures: internal error, Lambda'(1/X) = 0");
        const std::uint8_t value = gf::mul(x_m, gf::div(num, den));
        word[static_cast<std::size_t>(positions[static_cast<std::size_t>(m)])] = value;
    }

    std::copy(word.begin(), word.begin() + code.k, res.info.begin());
    return res;
}

}  // namespace uep
