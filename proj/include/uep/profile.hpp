#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uep/errors.hpp"

namespace uep {

// Importance classes of a codestream, in decreasing order of importance:
// headers plus low-frequency significance/bitplane counts, low-frequency
// data, high-frequency content.
inline constexpr int kClassCritical = 0;
inline constexpr int kClassLfData = 1;
inline constexpr int kClassHf = 2;
inline constexpr int kNumClasses = 3;

// Empirical model of a codestream: per-class sizes versus source rate, the
// source rate-distortion curve, and the three channel-distortion constants.
struct CodestreamProfile {
    std::string name;
    std::string notes;
    std::vector<double> rate_grid;                    // bytes/frame, ascending
    std::vector<std::array<double, 3>> class_sizes;   // bytes, per grid rate
    std::vector<double> source_mse;                   // per grid rate, strictly decreasing
    double delta = 90.0;      // MSE increase per percent of lost LF-data packets
    double delta_all = 9000.0;  // MSE of a dropped frame
    double delta_hf = 4.0;      // MSE of discarding all HF content

    [[nodiscard]] double min_rate() const { return rate_grid.front(); }
    [[nodiscard]] double max_rate() const { return rate_grid.back(); }

    void validate() const {
        if (name.empty()) throw ParseError("profile: missing name");
        const std::size_t g = rate_grid.size();
        if (g < 2) throw ParseError("profile: rate_grid needs at least 2 points");
        if (class_sizes.size() != g || source_mse.size() != g)
            throw ParseError("profile: class_sizes/source_mse must match rate_grid length");
        for (std::size_t i = 0; i + 1 < g; ++i) {
            if (!(rate_grid[i] < rate_grid[i + 1]))
                throw ParseError("profile: rate_grid must be strictly ascending at index " + std::to_string(i));
            if (!(source_mse[i] > source_mse[i + 1]))
                throw ParseError("profile: source_mse must be strictly decreasing at index " + std::to_string(i));
        }
        for (std::size_t i = 0; i < g; ++i) {
            double sum = 0.0;
            for (double v : class_sizes[i]) {
                if (v < 0.0) throw ParseError("profile: negative class size at grid index " + std::to_string(i));
                sum += v;
            }
            if (std::abs(sum - rate_grid[i]) > 1e-6 * rate_grid[i])
                throw ParseError("profile: class sizes at grid index " + std::to_string(i) + " sum to " +
                                 std::to_string(sum) + ", expected " + std::to_string(rate_grid[i]));
            if (source_mse[i] < 0.0) throw ParseError("profile: negative MSE at grid index " + std::to_string(i));
        }
        if (delta < 0.0 || delta_all < 0.0 || delta_hf < 0.0)
            throw ParseError("profile: distortion constants must be nonnegative");
        if (delta_all < delta_hf)
            throw ParseError("profile: delta_all must be >= delta_hf");
    }
};

namespace detail {

struct GridPos {
    std::size_t left;
    double t;  // interpolation parameter in [0,1]
};

inline GridPos locate(const CodestreamProfile& p, double r_s) {
    const double lo = p.min_rate();
    const double hi = p.max_rate();
    // Absorb float slop at the endpoints, reject genuine out-of-range rates.
    const double slack = 1e-9 * hi;
    if (r_s < lo - slack || r_s > hi + slack)
        throw RangeError("rate " + std::to_string(r_s) + " outside profile range [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
    if (r_s <= lo) return {0, 0.0};
    if (r_s >= hi) return {p.rate_grid.size() - 2, 1.0};
    std::size_t left = 0;
    while (p.rate_grid[left + 1] < r_s) ++left;
    const double span = p.rate_grid[left + 1] - p.rate_grid[left];
    return {left, (r_s - p.rate_grid[left]) / span};
}

}  // namespace detail

// Piecewise-linear class sizes, renormalized so the triple sums to r_s
// exactly. Because the grid triples sum to their grid rates, the
// renormalization only removes rounding drift.
inline std::array<double, 3> class_sizes(const CodestreamProfile& p, double r_s) {
    const auto pos = detail::locate(p, r_s);
    std::array<double, 3> out{};
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double a = p.class_sizes[pos.left][static_cast<std::size_t>(c)];
        const double b = p.class_sizes[pos.left + 1][static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(c)] = a + pos.t * (b - a);
        sum += out[static_cast<std::size_t>(c)];
    }
    if (sum > 0.0) {
        const double scale = r_s / sum;
        for (auto& v : out) v *= scale;
    }
    return out;
}

inline double source_distortion(const CodestreamProfile& p, double r_s) {
    const auto pos = detail::locate(p, r_s);
    const double a = p.source_mse[pos.left];
    const double b = p.source_mse[pos.left + 1];
    return a + pos.t * (b - a);
}

// Derivative of the piecewise-linear rate-distortion curve; at interior grid
// points the mean of the adjacent segment slopes, at the ends the single
// adjacent slope. Always <= 0 for a valid profile.
inline double source_slope(const CodestreamProfile& p, double r_s) {
    const auto pos = detail::locate(p, r_s);
    const auto seg_slope = [&](std::size_t s) {
        return (p.source_mse[s + 1] - p.source_mse[s]) / (p.rate_grid[s + 1] - p.rate_grid[s]);
    };
    const double eps = 1e-9 * p.max_rate();
    const bool on_left_vertex = pos.t <= 0.0 + 1e-12;
    const bool on_right_vertex = pos.t >= 1.0 - 1e-12;
    if (on_left_vertex && std::abs(r_s - p.rate_grid[pos.left]) <= eps) {
        if (pos.left == 0) return seg_slope(0);
        return 0.5 * (seg_slope(pos.left - 1) + seg_slope(pos.left));
    }
    if (on_right_vertex && std::abs(r_s - p.rate_grid[pos.left + 1]) <= eps) {
        if (pos.left + 2 == p.rate_grid.size()) return seg_slope(pos.left);
        return 0.5 * (seg_slope(pos.left) + seg_slope(pos.left + 1));
    }
    return seg_slope(pos.left);
}

inline CodestreamProfile parse_profile(const std::string& text, const std::string& origin = "<string>") {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("profile " + origin + ": " + e.what());
    }
    CodestreamProfile p;
    try {
        p.name = j.at("name").get<std::string>();
        p.rate_grid = j.at("rate_grid").get<std::vector<double>>();
        for (const auto& row : j.at("class_sizes")) {
            if (!row.is_array() || row.size() != 3)
                throw ParseError("profile " + origin + ": class_sizes rows must be triples");
            p.class_sizes.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
        }
        p.source_mse = j.at("source_mse").get<std::vector<double>>();
        p.delta = j.at("delta").get<double>();
        p.delta_all = j.at("delta_all").get<double>();
        p.delta_hf = j.at("delta_hf").get<double>();
        if (j.contains("notes")) p.notes = j["notes"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("profile " + origin + ": " + e.what());
    }
    p.validate();
    return p;
}

inline CodestreamProfile load_profile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("profile: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_profile(ss.str(), path.string());
}

}  // namespace uep
