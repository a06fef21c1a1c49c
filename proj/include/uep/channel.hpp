#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "uep/errors.hpp"

namespace uep {

enum class ChannelKind { gilbert, bernoulli };

inline const char* channel_kind_name(ChannelKind k) {
    return k == ChannelKind::gilbert ? "gilbert" : "bernoulli";
}

struct ChannelSpec {
    ChannelKind kind = ChannelKind::gilbert;
    double loss_rate = 0.0;      // stationary packet loss probability, [0,1)
    double avg_burst_len = 1.0;  // mean consecutive losses (Gilbert only), >= 1
};

// Two-state Markov chain: packets sent from the bad state are lost. A
// Bernoulli channel is the special case p_good_to_bad + p_bad_to_good = 1.
struct GilbertParams {
    double p_good_to_bad = 0.0;
    double p_bad_to_good = 1.0;

    [[nodiscard]] double stationary_loss() const {
        const double s = p_good_to_bad + p_bad_to_good;
        return s > 0.0 ? p_good_to_bad / s : 0.0;
    }
    [[nodiscard]] double mean_burst_len() const { return 1.0 / p_bad_to_good; }
};

// Solve the two-parameter chain for a given loss rate and mean burst length:
// p_bg = 1/abel and stationarity p_gb/(p_gb+p_bg) = plr.
inline GilbertParams fit_gilbert(const ChannelSpec& spec) {
    if (!(spec.loss_rate >= 0.0) || spec.loss_rate >= 1.0)
        throw ParamError("channel: loss_rate must be in [0,1), got " + std::to_string(spec.loss_rate));
    if (spec.kind == ChannelKind::bernoulli)
        return {spec.loss_rate, 1.0 - spec.loss_rate};
    if (!(spec.avg_burst_len >= 1.0))
        throw ParamError("channel: avg_burst_len must be >= 1, got " + std::to_string(spec.avg_burst_len));
    const double p_bg = 1.0 / spec.avg_burst_len;
    const double p_gb = spec.loss_rate * p_bg / (1.0 - spec.loss_rate);
    if (p_gb > 1.0)
        throw ParamError("channel: infeasible spec, derived good->bad probability " + std::to_string(p_gb) +
                         " exceeds 1 (burst length too short for this loss rate)");
    return {p_gb, p_bg};
}

// Seeded Markov-chain realization, started from the stationary distribution.
// Uniform doubles are derived from the raw engine output so that masks are
// identical on every conforming platform.
class LossSampler {
public:
    LossSampler(const GilbertParams& params, std::uint64_t seed) : params_(params), rng_(seed) {
        reset_stationary();
    }

    void reset_stationary() { bad_ = next_uniform() < params_.stationary_loss(); }

    // Loss indicator for the next packet.
    bool next() {
        const bool lost = bad_;
        const double u = next_uniform();
        bad_ = bad_ ? !(u < params_.p_bad_to_good) : (u < params_.p_good_to_bad);
        return lost;
    }

    std::vector<std::uint8_t> sample(int n_packets) {
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(n_packets));
        for (auto& m : mask) m = next() ? 1 : 0;
        return mask;
    }

private:
    double next_uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    GilbertParams params_;
    std::mt19937_64 rng_;
    bool bad_ = false;
};

inline std::vector<std::uint8_t> sample_losses(const GilbertParams& params, int n_packets, std::uint64_t seed) {
    LossSampler s(params, seed);
    return s.sample(n_packets);
}

// Exact distribution of the number of lost packets in an n-packet block.
struct LossPmf {
    int n = 0;
    std::vector<double> p;  // size n+1

    [[nodiscard]] double mean() const {
        double m = 0.0;
        for (int j = 0; j <= n; ++j) m += j * p[static_cast<std::size_t>(j)];
        return m;
    }
};

// Dynamic program over (packet index, chain state, losses so far) with a
// stationary initial state.
inline LossPmf block_loss_pmf(const GilbertParams& params, int n) {
    if (n < 1 || n > 255) throw ParamError("block_loss_pmf: n must be in [1,255]");
    const double pi_bad = params.stationary_loss();
    std::vector<double> good(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> bad(static_cast<std::size_t>(n) + 1, 0.0);
    good[0] = 1.0 - pi_bad;
    bad[1] = pi_bad;
    std::vector<double> ngood(good.size()), nbad(bad.size());
    for (int step = 1; step < n; ++step) {
        for (int j = 0; j <= n; ++j) {
            const double g = good[static_cast<std::size_t>(j)];
            const double b = bad[static_cast<std::size_t>(j)];
            ngood[static_cast<std::size_t>(j)] = g * (1.0 - params.p_good_to_bad) + b * params.p_bad_to_good;
            // Entering (or staying in) the bad state loses the current packet.
            const double from_g = j > 0 ? good[static_cast<std::size_t>(j - 1)] * params.p_good_to_bad : 0.0;
            const double from_b = j > 0 ? bad[static_cast<std::size_t>(j - 1)] * (1.0 - params.p_bad_to_good) : 0.0;
            nbad[static_cast<std::size_t>(j)] = from_g + from_b;
        }
        good.swap(ngood);
        bad.swap(nbad);
    }
    LossPmf pmf;
    pmf.n = n;
    pmf.p.resize(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j)
        pmf.p[static_cast<std::size_t>(j)] = good[static_cast<std::size_t>(j)] + bad[static_cast<std::size_t>(j)];
    return pmf;
}

// P(Y > n-k): probability that more packets are lost than a (n,k) code can absorb.
inline double tail_prob(const LossPmf& pmf, int k) {
    if (k < 1 || k > pmf.n) throw ParamError("tail_prob: k out of range");
    double s = 0.0;
    for (int j = pmf.n; j > pmf.n - k; --j) s += pmf.p[static_cast<std::size_t>(j)];
    return s;
}

// Suffix sums of the pmf, shared by the distortion model and the optimizer:
// tail[j] = P(Y >= j) and frac_tail[j] = sum_{y >= j} (y/n) p(y).
struct PmfTails {
    int n = 0;
    std::vector<double> tail;
    std::vector<double> frac_tail;

    PmfTails() = default;
    explicit PmfTails(const LossPmf& pmf) : n(pmf.n) {
        tail.assign(static_cast<std::size_t>(n) + 2, 0.0);
        frac_tail.assign(static_cast<std::size_t>(n) + 2, 0.0);
        for (int j = n; j >= 0; --j) {
            tail[static_cast<std::size_t>(j)] = tail[static_cast<std::size_t>(j) + 1] + pmf.p[static_cast<std::size_t>(j)];
            frac_tail[static_cast<std::size_t>(j)] =
                frac_tail[static_cast<std::size_t>(j) + 1] +
                (static_cast<double>(j) / n) * pmf.p[static_cast<std::size_t>(j)];
        }
    }

    // P(Y > n-k) for an (n,k) code.
    [[nodiscard]] double loss_exceeds(int k) const { return tail[static_cast<std::size_t>(n - k + 1)]; }
    // sum_{y > n-k} (y/n) p(y).
    [[nodiscard]] double lost_fraction_tail(int k) const { return frac_tail[static_cast<std::size_t>(n - k + 1)]; }
};

}  // namespace uep
