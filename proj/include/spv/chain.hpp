// Copyright (c) 2026 The spvkit developers
// Licensed under the Apache License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spv/header.hpp"

namespace spv::chain {

// Outcome of one header check, in the order the checks run: broken linkage
// first, then insufficient proof-of-work, then malformed fields (timestamp
// not increasing, or nBits disagreeing with the expected target).
enum class Verdict { Ok, Linkage, Pow, Malformed };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Ok: return "ok";
        case Verdict::Linkage: return "linkage";
        case Verdict::Pow: return "pow";
        case Verdict::Malformed: return "malformed";
    }
    return "?";
}

struct ChainParams {
    Target network_target;            // target in force from genesis
    std::size_t retarget_window = 2016;
    unsigned clamp_factor = 4;
    std::uint32_t target_spacing_s = 600;
};

inline ChainParams params_from_bits(std::uint32_t n_bits) {
    ChainParams p;
    p.network_target = decode_compact(n_bits);
    return p;
}

// prev == nullptr only for genesis; linkage and the timestamp rule are then
// vacuous and genesis validity reduces to PoW plus well-formedness.
inline Verdict validate_header(const BlockHeader* prev, const BlockHeader& h,
                               const Target& expected_target) {
    if (prev != nullptr && h.prev_hash != header_hash(*prev)) return Verdict::Linkage;
    if (!meets_target(header_hash(h), expected_target)) return Verdict::Pow;
    if (prev != nullptr && h.timestamp <= prev->timestamp) return Verdict::Malformed;
    if (h.n_bits != encode_compact(expected_target)) return Verdict::Malformed;
    return Verdict::Ok;
}

// New target after one difficulty window: scale by the clamped ratio of actual
// to expected timespan, then re-canonicalise through the compact encoding.
inline Target retarget(const Target& prev_target, std::uint64_t actual_timespan_s,
                       std::uint64_t expected_timespan_s, unsigned clamp_factor = 4) {
    std::uint64_t lo = expected_timespan_s / clamp_factor;
    std::uint64_t hi = expected_timespan_s * clamp_factor;
    std::uint64_t clamped = std::clamp(actual_timespan_s, lo, hi);
    Target next = prev_target * clamped / expected_timespan_s;
    if (next <= 0) next = 1;
    if (next >= kTwo256) next = kTwo256 - 1;
    return decode_compact(encode_compact(next));
}

// Tracks the expected target while a chain is walked from genesis, applying
// the retarget rule once per completed window.
class TargetSchedule {
  public:
    explicit TargetSchedule(const ChainParams& params)
        : params_(params), current_(params.network_target) {}

    // Expected target for the header at `height`, given the accepted prefix.
    const Target& expected_at(std::size_t height, std::span<const BlockHeader> accepted) {
        const std::size_t w = params_.retarget_window;
        if (w > 0 && height > 0 && height % w == 0 && height > last_boundary_) {
            std::uint64_t actual = accepted[height - 1].timestamp - accepted[height - w].timestamp;
            std::uint64_t expected = static_cast<std::uint64_t>(w) * params_.target_spacing_s;
            current_ = retarget(current_, actual, expected, params_.clamp_factor);
            last_boundary_ = height;
        }
        return current_;
    }

  private:
    ChainParams params_;
    Target current_;
    std::size_t last_boundary_ = 0;
};

// Validated header sequence with its exact cumulative work (sum of
// floor(2^256 / T_i), the chain-selection score).
struct HeaderChain {
    std::vector<BlockHeader> headers;
    Target work = 0;

    std::size_t size() const { return headers.size(); }
    bool empty() const { return headers.empty(); }
    const BlockHeader& tip() const { return headers.back(); }
    std::size_t tip_height() const { return headers.size() - 1; }
};

inline Target cumulative_work(std::span<const BlockHeader> headers) {
    Target total = 0;
    for (const BlockHeader& h : headers) total += unit_work(decode_compact(h.n_bits));
    return total;
}

inline Target cumulative_work(const HeaderChain& chain) { return cumulative_work(chain.headers); }

// Longest valid prefix: validates pairwise from genesis and stops at the
// first failure. Per-header verdicts (up to and including the failing one)
// are reported through `verdicts` when given.
inline HeaderChain parse_chain(std::span<const BlockHeader> input, const ChainParams& params,
                               std::vector<Verdict>* verdicts = nullptr) {
    HeaderChain chain;
    TargetSchedule schedule(params);
    for (std::size_t i = 0; i < input.size(); ++i) {
        const Target& expected = schedule.expected_at(i, chain.headers);
        const BlockHeader* prev = chain.empty() ? nullptr : &chain.headers.back();
        Verdict v = validate_header(prev, input[i], expected);
        if (verdicts) verdicts->push_back(v);
        if (v != Verdict::Ok) break;
        chain.headers.push_back(input[i]);
        chain.work += unit_work(expected);
    }
    return chain;
}

inline bool is_consistent(std::span<const BlockHeader> headers, const ChainParams& params) {
    return parse_chain(headers, params).size() == headers.size();
}

inline bool is_consistent(const HeaderChain& chain, const ChainParams& params) {
    return is_consistent(std::span<const BlockHeader>(chain.headers), params);
}

// Highest-work consistent candidate; ties break toward the lexicographically
// smaller tip hash. Inconsistent chains are never selected regardless of work.
inline const HeaderChain& select_chain(std::span<const HeaderChain> candidates,
                                       const ChainParams& params) {
    const HeaderChain* best = nullptr;
    Target best_work = 0;
    Hash best_tip{};
    for (const HeaderChain& c : candidates) {
        if (c.empty() || !is_consistent(c, params)) continue;
        Target w = cumulative_work(c);
        Hash tip = header_hash(c.tip());
        if (best == nullptr || w > best_work || (w == best_work && tip < best_tip)) {
            best = &c;
            best_work = w;
            best_tip = tip;
        }
    }
    if (best == nullptr) throw NoConsistentCandidate();
    return *best;
}

// Differential sync: exactly the suffix the peer is missing, never a header
// it already holds. local_height is -1 when nothing is known.
inline std::vector<BlockHeader> diff_sync(std::int64_t local_height,
                                          std::span<const BlockHeader> remote) {
    std::vector<BlockHeader> delta;
    for (std::size_t i = 0; i < remote.size(); ++i)
        if (static_cast<std::int64_t>(i) > local_height) delta.push_back(remote[i]);
    return delta;
}

// ---- on-disk fixture format ---------------------------------------------------
// JSON {network_target_hex, headers:[hex80,...]}; target is the full 256-bit
// value in lowercase hex, headers are raw 80-byte encodings in hex.

inline std::string target_to_hex(const Target& t) {
    Hash bytes{};
    Target v = t;
    for (int i = 31; i >= 0; --i) {
        bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v & 0xFF);
        v >>= 8;
    }
    return to_hex(bytes);
}

inline Target target_from_hex(const std::string& hex) {
    auto bytes = from_hex(hex);
    if (!bytes || bytes->size() != 32) throw MalformedInput("expected 64 hex chars of target");
    Target v = 0;
    for (std::uint8_t b : *bytes) v = (v << 8) | b;
    return v;
}

struct ChainFile {
    Target network_target;
    std::vector<BlockHeader> headers;

    ChainParams params() const {
        ChainParams p;
        p.network_target = network_target;
        return p;
    }
};

inline void to_json(nlohmann::json& j, const ChainFile& f) {
    nlohmann::json headers = nlohmann::json::array();
    for (const BlockHeader& h : f.headers) {
        auto bytes = encode_header(h);
        headers.push_back(to_hex(ByteSpan{bytes.data(), bytes.size()}));
    }
    j = nlohmann::json{{"network_target_hex", target_to_hex(f.network_target)},
                       {"headers", std::move(headers)}};
}

inline void from_json(const nlohmann::json& j, ChainFile& f) {
    f.network_target = target_from_hex(j.at("network_target_hex").get<std::string>());
    f.headers.clear();
    for (const auto& hex : j.at("headers")) {
        auto bytes = from_hex(hex.get<std::string>());
        if (!bytes) throw MalformedInput("header hex malformed");
        f.headers.push_back(decode_header(*bytes));
    }
}

}  // namespace spv::chain
