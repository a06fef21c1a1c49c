#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "uep/errors.hpp"
#include "uep/profile.hpp"
#include "uep/reed_solomon.hpp"

namespace uep {

// One interleaving block: n packets, each carrying one symbol of every
// codeword. Class i occupies codewords[i] consecutive codeword columns and
// contributes payload_bytes[i] real (pre-padding) bytes.
struct BlockLayout {
    int n = 255;
    int packet_len = 1500;
    std::array<int, 3> k{255, 255, 255};
    std::array<int, 3> codewords{0, 0, 0};
    std::array<std::int64_t, 3> payload_bytes{0, 0, 0};

    [[nodiscard]] int packet_bytes() const { return codewords[0] + codewords[1] + codewords[2]; }
    [[nodiscard]] int class_offset(int cls) const {
        int off = 0;
        for (int c = 0; c < cls; ++c) off += codewords[static_cast<std::size_t>(c)];
        return off;
    }
};

inline BlockLayout plan_layout(const std::array<std::int64_t, 3>& class_bytes, const std::array<int, 3>& k, int n,
                               int packet_len) {
    if (n < 1 || n > 255) throw ParamError("plan_layout: n must be in [1,255]");
    BlockLayout layout;
    layout.n = n;
    layout.packet_len = packet_len;
    layout.k = k;
    layout.payload_bytes = class_bytes;
    for (int c = 0; c < 3; ++c) {
        const auto kc = k[static_cast<std::size_t>(c)];
        if (kc < 1 || kc > n) throw ParamError("plan_layout: k out of [1,n]");
        const auto bytes = class_bytes[static_cast<std::size_t>(c)];
        if (bytes < 0) throw ParamError("plan_layout: negative class byte count");
        layout.codewords[static_cast<std::size_t>(c)] = static_cast<int>((bytes + kc - 1) / kc);
    }
    if (layout.packet_bytes() > packet_len)
        throw LayoutError("plan_layout: " + std::to_string(layout.packet_bytes()) + " codewords exceed packet length " +
                          std::to_string(packet_len) + "; lower the source rate or raise K");
    return layout;
}

// A frame split into interleaving blocks. Class bytes are spread over the
// blocks in equal shares with a ragged final block, so every block sees the
// same per-class statistics.
struct FrameLayout {
    int n = 255;
    int packet_len = 1500;
    std::array<int, 3> k{255, 255, 255};
    std::array<std::int64_t, 3> class_bytes{0, 0, 0};
    std::vector<BlockLayout> blocks;

    [[nodiscard]] int block_count() const { return static_cast<int>(blocks.size()); }
    [[nodiscard]] std::int64_t source_bytes() const {
        return class_bytes[0] + class_bytes[1] + class_bytes[2];
    }
    // Bytes actually put on the wire (codeword rounding included).
    [[nodiscard]] std::int64_t transmitted_bytes() const {
        std::int64_t total = 0;
        for (const auto& b : blocks) total += static_cast<std::int64_t>(b.n) * b.packet_bytes();
        return total;
    }
};

inline FrameLayout plan_frame(const std::array<std::int64_t, 3>& class_bytes, const std::array<int, 3>& k, int n,
                              int packet_len) {
    FrameLayout frame;
    frame.n = n;
    frame.packet_len = packet_len;
    frame.k = k;
    frame.class_bytes = class_bytes;

    const auto share = [](std::int64_t total, int blocks) { return (total + blocks - 1) / blocks; };
    int b = 1;
    // Lower bound from the total codeword count, then grow until block 0 fits
    // (non-last blocks carry the maximal shares).
    std::int64_t cw_total = 0;
    for (int c = 0; c < 3; ++c)
        cw_total += (class_bytes[static_cast<std::size_t>(c)] + k[static_cast<std::size_t>(c)] - 1) /
                    k[static_cast<std::size_t>(c)];
    b = static_cast<int>(std::max<std::int64_t>(1, (cw_total + packet_len - 1) / packet_len));
    for (;; ++b) {
        std::array<std::int64_t, 3> head{};
        for (int c = 0; c < 3; ++c) head[static_cast<std::size_t>(c)] = share(class_bytes[static_cast<std::size_t>(c)], b);
        int cw = 0;
        for (int c = 0; c < 3; ++c)
            cw += static_cast<int>((head[static_cast<std::size_t>(c)] + k[static_cast<std::size_t>(c)] - 1) /
                                   k[static_cast<std::size_t>(c)]);
        if (cw <= packet_len) break;
        if (b > 1'000'000) throw LayoutError("plan_frame: cannot fit frame into blocks");
    }

    for (int i = 0; i < b; ++i) {
        std::array<std::int64_t, 3> bytes{};
        for (int c = 0; c < 3; ++c) {
            const auto total = class_bytes[static_cast<std::size_t>(c)];
            const auto s = share(total, b);
            bytes[static_cast<std::size_t>(c)] = (i + 1 < b) ? s : total - s * (b - 1);
            if (bytes[static_cast<std::size_t>(c)] < 0) bytes[static_cast<std::size_t>(c)] = 0;
        }
        frame.blocks.push_back(plan_layout(bytes, k, n, packet_len));
    }
    return frame;
}

struct InterleavingBlock {
    BlockLayout layout;
    // n packets of layout.packet_bytes() each; packet s holds symbol s of
    // every codeword, so losing one packet erases exactly one symbol per
    // codeword.
    std::vector<std::vector<std::uint8_t>> packets;
};

// Build the blocks of a frame from the three class byte streams.
inline std::vector<InterleavingBlock> build_blocks(const std::array<std::vector<std::uint8_t>, 3>& class_streams,
                                                   const FrameLayout& frame) {
    for (int c = 0; c < 3; ++c)
        if (static_cast<std::int64_t>(class_streams[static_cast<std::size_t>(c)].size()) !=
            frame.class_bytes[static_cast<std::size_t>(c)])
            throw ParamError("build_blocks: class stream length does not match the layout");

    std::vector<InterleavingBlock> blocks;
    blocks.reserve(frame.blocks.size());
    std::array<std::size_t, 3> cursor{0, 0, 0};
    for (const auto& layout : frame.blocks) {
        InterleavingBlock blk;
        blk.layout = layout;
        blk.packets.assign(static_cast<std::size_t>(layout.n),
                           std::vector<std::uint8_t>(static_cast<std::size_t>(layout.packet_bytes()), 0));
        int column = 0;
        for (int c = 0; c < 3; ++c) {
            const int kc = layout.k[static_cast<std::size_t>(c)];
            const RsCode code(layout.n, kc);
            const auto& stream = class_streams[static_cast<std::size_t>(c)];
            auto& cur = cursor[static_cast<std::size_t>(c)];
            std::int64_t remaining = layout.payload_bytes[static_cast<std::size_t>(c)];
            for (int w = 0; w < layout.codewords[static_cast<std::size_t>(c)]; ++w) {
                std::vector<std::uint8_t> info(static_cast<std::size_t>(kc), 0);
                const auto take = static_cast<std::size_t>(std::min<std::int64_t>(remaining, kc));
                std::copy_n(stream.begin() + static_cast<std::ptrdiff_t>(cur), take, info.begin());
                cur += take;
                remaining -= static_cast<std::int64_t>(take);
                const auto cw = rs_encode(code, info);
                for (int s = 0; s < layout.n; ++s)
                    blk.packets[static_cast<std::size_t>(s)][static_cast<std::size_t>(column)] =
                        cw[static_cast<std::size_t>(s)];
                ++column;
            }
        }
        blocks.push_back(std::move(blk));
    }
    return blocks;
}

enum class ClassState { recovered, partially_lost, unrecoverable };

struct ClassRecovery {
    std::array<ClassState, 3> state{ClassState::recovered, ClassState::recovered, ClassState::recovered};
    // Fraction of lost packets j/n; meaningful for the LF-data class when it
    // exceeds its correction capability.
    std::array<double, 3> fraction_lost{0.0, 0.0, 0.0};
    int lost_packets = 0;
};

// Count-level recovery prediction: with an MDS code, recoverability of class
// i depends only on whether the block lost more than n - K_i packets.
inline ClassRecovery predict_recovery(const BlockLayout& layout, int lost_packets) {
    ClassRecovery rec;
    rec.lost_packets = lost_packets;
    for (int c = 0; c < 3; ++c) {
        const int kc = layout.k[static_cast<std::size_t>(c)];
        if (lost_packets <= layout.n - kc) {
            rec.state[static_cast<std::size_t>(c)] = ClassState::recovered;
        } else {
            const double frac = static_cast<double>(lost_packets) / layout.n;
            rec.fraction_lost[static_cast<std::size_t>(c)] = frac;
            // Only the LF-data class is worth decoding partially; decoding
            // corrupted critical or HF content is worse than dropping it.
            rec.state[static_cast<std::size_t>(c)] =
                (c == kClassLfData) ? ClassState::partially_lost : ClassState::unrecoverable;
        }
    }
    return rec;
}

struct BlockRecovery {
    ClassRecovery summary;
    // Recovered payload per class. For a partially lost LF-data class this
    // holds the surviving systematic bytes in stream order; for unrecoverable
    // classes it is empty.
    std::array<std::vector<std::uint8_t>, 3> payload;
};

inline BlockRecovery recover_block(const InterleavingBlock& blk, std::span<const std::uint8_t> loss_mask) {
    const auto& layout = blk.layout;
    if (static_cast<int>(loss_mask.size()) != layout.n)
        throw ParamError("recover_block: loss mask length != n");
    int lost = 0;
    for (auto m : loss_mask) lost += (m != 0);

    BlockRecovery out;
    out.summary = predict_recovery(layout, lost);

    std::vector<std::uint8_t> received(static_cast<std::size_t>(layout.n));
    std::vector<std::uint8_t> mask(loss_mask.begin(), loss_mask.end());
    for (int c = 0; c < 3; ++c) {
        const auto state = out.summary.state[static_cast<std::size_t>(c)];
        if (state == ClassState::unrecoverable) continue;
        const int kc = layout.k[static_cast<std::size_t>(c)];
        const RsCode code(layout.n, kc);
        const int base = layout.class_offset(c);
        auto& payload = out.payload[static_cast<std::size_t>(c)];
        const std::int64_t payload_len = layout.payload_bytes[static_cast<std::size_t>(c)];
        for (int w = 0; w < layout.codewords[static_cast<std::size_t>(c)]; ++w) {
            for (int s = 0; s < layout.n; ++s)
                received[static_cast<std::size_t>(s)] =
                    mask[static_cast<std::size_t>(s)] ? 0 : blk.packets[static_cast<std::size_t>(s)][static_cast<std::size_t>(base + w)];
            const auto res = rs_decode_erasures(code, received, mask);
            const std::int64_t cw_start = static_cast<std::int64_t>(w) * kc;
            if (state == ClassState::recovered) {
                if (!res.recovered) throw Error("recover_block: decode failed below the erasure budget");
                const auto take = static_cast<std::size_t>(
                    std::clamp<std::int64_t>(payload_len - cw_start, 0, kc));
                payload.insert(payload.end(), res.info.begin(), res.info.begin() + static_cast<std::ptrdiff_t>(take));
            } else {
                // Partial LF data: keep surviving systematic bytes that fall
                // inside the real payload (padding excluded).
                for (std::size_t i = 0; i < res.survivor_positions.size(); ++i) {
                    const std::int64_t pos = cw_start + res.survivor_positions[i];
                    if (pos < payload_len) payload.push_back(res.survivor_bytes[i]);
                }
            }
        }
    }
    return out;
}

// Debug dump: every packet as one length-prefixed record (u32 little endian).
inline void dump_blocks(std::ostream& os, std::span<const InterleavingBlock> blocks) {
    for (const auto& blk : blocks) {
        for (const auto& packet : blk.packets) {
            const auto len = static_cast<std::uint32_t>(packet.size());
            const std::uint8_t hdr[4] = {static_cast<std::uint8_t>(len), static_cast<std::uint8_t>(len >> 8),
                                         static_cast<std::uint8_t>(len >> 16), static_cast<std::uint8_t>(len >> 24)};
            os.write(reinterpret_cast<const char*>(hdr), 4);
            os.write(reinterpret_cast<const char*>(packet.data()), static_cast<std::streamsize>(packet.size()));
        }
    }
}

}  // namespace uep
