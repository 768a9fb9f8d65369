// Copyright (c) 2026 The spvkit developers
// Licensed under the Apache License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <array>
#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

#include "spv/bytes.hpp"
#include "spv/errors.hpp"
#include "spv/sha256.hpp"

namespace spv::chain {

// 256-bit proof-of-work threshold, decoded from the compact nBits field.
using Target = boost::multiprecision::cpp_int;

inline const Target kTwo256 = Target(1) << 256;

inline constexpr std::size_t kHeaderSize = 80;

// Six-field header record. Wire layout (80 bytes): version 4B LE, prev_hash
// 32B, merkle_root 32B, timestamp 4B LE, n_bits 4B LE, nonce 4B LE.
struct BlockHeader {
    std::int32_t version = 1;
    Hash prev_hash{};
    Hash merkle_root{};
    std::uint32_t timestamp = 0;
    std::uint32_t n_bits = 0;
    std::uint32_t nonce = 0;

    bool operator==(const BlockHeader&) const = default;
};

inline std::array<std::uint8_t, kHeaderSize> encode_header(const BlockHeader& h) {
    Bytes buf;
    buf.reserve(kHeaderSize);
    put_u32_le(buf, static_cast<std::uint32_t>(h.version));
    buf.insert(buf.end(), h.prev_hash.begin(), h.prev_hash.end());
    buf.insert(buf.end(), h.merkle_root.begin(), h.merkle_root.end());
    put_u32_le(buf, h.timestamp);
    put_u32_le(buf, h.n_bits);
    put_u32_le(buf, h.nonce);
    std::array<std::uint8_t, kHeaderSize> out;
    std::copy(buf.begin(), buf.end(), out.begin());
    return out;
}

inline BlockHeader decode_header(ByteSpan bytes) {
    if (bytes.size() != kHeaderSize) throw WrongLength("header must be exactly 80 bytes");
    BlockHeader h;
    h.version = static_cast<std::int32_t>(read_u32_le(bytes.data()));
    std::copy(bytes.begin() + 4, bytes.begin() + 36, h.prev_hash.begin());
    std::copy(bytes.begin() + 36, bytes.begin() + 68, h.merkle_root.begin());
    h.timestamp = read_u32_le(bytes.data() + 68);
    h.n_bits = read_u32_le(bytes.data() + 72);
    h.nonce = read_u32_le(bytes.data() + 76);
    return h;
}

inline Hash header_hash(const BlockHeader& h) {
    auto bytes = encode_header(h);
    return sha256d(ByteSpan{bytes.data(), bytes.size()});
}

// ---- compact target codec ----------------------------------------------------
//
// nBits packs a target as mantissa * 256^(exponent-3), exponent in the top
// byte and mantissa in the low three. Canonical encodings keep the mantissa's
// top byte below 0x80 so no value ever round-trips through a sign bit.

inline Target decode_compact(std::uint32_t n_bits) {
    std::uint32_t exponent = n_bits >> 24;
    std::uint32_t mantissa = n_bits & 0x00FFFFFF;
    if (mantissa == 0) throw ZeroTarget();
    Target value = mantissa;
    if (exponent <= 3) {
        value >>= 8 * (3 - exponent);
        if (value == 0) throw ZeroTarget();
    } else {
        value <<= 8 * (exponent - 3);
    }
    if (value >= kTwo256) throw Overflow("compact target exceeds 2^256");
    return value;
}

inline std::uint32_t encode_compact(const Target& target) {
    if (target <= 0) throw ZeroTarget();
    if (target >= kTwo256) throw Overflow("target exceeds 2^256");
    std::size_t byte_len = (boost::multiprecision::msb(target) / 8) + 1;
    std::uint32_t mantissa;
    if (byte_len <= 3) {
        mantissa = target.convert_to<std::uint32_t>() << (8 * (3 - byte_len));
    } else {
        mantissa = (target >> (8 * (byte_len - 3))).convert_to<std::uint32_t>();
    }
    if (mantissa & 0x00800000) {  // avoid the sign-bit leak
        mantissa >>= 8;
        byte_len += 1;
    }
    return (static_cast<std::uint32_t>(byte_len) << 24) | mantissa;
}

// Hash bytes interpreted as a 256-bit big-endian integer.
inline Target hash_to_uint256(const Hash& h) {
    Target v = 0;
    for (std::uint8_t b : h) v = (v << 8) | b;
    return v;
}

inline bool meets_target(const Hash& hash, const Target& target) {
    return hash_to_uint256(hash) < target;
}

// Work contributed by one header: floor(2^256 / T), exact.
inline Target unit_work(const Target& target) {
    if (target <= 0) throw ZeroTarget();
    return kTwo256 / target;
}

}  // namespace spv::chain
