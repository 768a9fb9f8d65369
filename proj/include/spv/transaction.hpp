// Copyright (c) 2026 The spvkit developers
// Licensed under the Apache License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "spv/bytes.hpp"
#include "spv/errors.hpp"
#include "spv/sha256.hpp"

namespace spv::client {

struct TxIn {
    Hash parent_txid{};
    std::uint32_t output_index = 0;
    Bytes unlock_witness;

    bool operator==(const TxIn&) const = default;
};

struct TxOut {
    std::uint64_t value = 0;
    Bytes lock_condition;

    bool operator==(const TxOut&) const = default;
};

// Canonical encoding: length-prefixed fields, little-endian integers.
// Layout: u32 input count; per input (txid 32B, u32 output index, u32 witness
// length, witness); u32 output count; per output (u64 value, u32 lock length,
// lock); u32 lock_time; u64 fee. The txid is the double SHA-256 of this.
struct Transaction {
    std::vector<TxIn> inputs;
    std::vector<TxOut> outputs;
    std::uint32_t lock_time = 0;
    std::uint64_t fee = 0;

    bool operator==(const Transaction&) const = default;

    Bytes encode() const {
        Bytes buf;
        put_u32_le(buf, static_cast<std::uint32_t>(inputs.size()));
        for (const TxIn& in : inputs) {
            buf.insert(buf.end(), in.parent_txid.begin(), in.parent_txid.end());
            put_u32_le(buf, in.output_index);
            put_u32_le(buf, static_cast<std::uint32_t>(in.unlock_witness.size()));
            buf.insert(buf.end(), in.unlock_witness.begin(), in.unlock_witness.end());
        }
        put_u32_le(buf, static_cast<std::uint32_t>(outputs.size()));
        for (const TxOut& out : outputs) {
            put_u64_le(buf, out.value);
            put_u32_le(buf, static_cast<std::uint32_t>(out.lock_condition.size()));
            buf.insert(buf.end(), out.lock_condition.begin(), out.lock_condition.end());
        }
        put_u32_le(buf, lock_time);
        put_u64_le(buf, fee);
        return buf;
    }

    Hash id() const { return sha256d(encode()); }

    static Transaction decode(ByteSpan bytes) {
        Reader r{bytes, 0};
        Transaction tx;
        std::uint32_t n_in = r.u32();
        for (std::uint32_t i = 0; i < n_in; ++i) {
            TxIn in;
            r.fill(in.parent_txid);
            in.output_index = r.u32();
            in.unlock_witness = r.blob(r.u32());
            tx.inputs.push_back(std::move(in));
        }
        std::uint32_t n_out = r.u32();
        for (std::uint32_t i = 0; i < n_out; ++i) {
            TxOut out;
            out.value = r.u64();
            out.lock_condition = r.blob(r.u32());
            tx.outputs.push_back(std::move(out));
        }
        tx.lock_time = r.u32();
        tx.fee = r.u64();
        if (r.pos != bytes.size()) throw MalformedInput("trailing bytes after transaction");
        return tx;
    }

  private:
    struct Reader {
        ByteSpan data;
        std::size_t pos;

        void need(std::size_t n) const {
            if (pos + n > data.size()) throw MalformedInput("truncated transaction");
        }
        std::uint32_t u32() {
            need(4);
            std::uint32_t v = read_u32_le(data.data() + pos);
            pos += 4;
            return v;
        }
        std::uint64_t u64() {
            need(8);
            std::uint64_t v = read_u64_le(data.data() + pos);
            pos += 8;
            return v;
        }
        void fill(Hash& h) {
            need(32);
            std::copy(data.begin() + static_cast<std::ptrdiff_t>(pos),
                      data.begin() + static_cast<std::ptrdiff_t>(pos) + 32, h.begin());
            pos += 32;
        }
        Bytes blob(std::uint32_t n) {
            need(n);
            Bytes b(data.begin() + static_cast<std::ptrdiff_t>(pos),
                    data.begin() + static_cast<std::ptrdiff_t>(pos + n));
            pos += n;
            return b;
        }
    };
};

inline void to_json(nlohmann::json& j, const Transaction& tx) { j = to_hex(tx.encode()); }

inline void from_json(const nlohmann::json& j, Transaction& tx) {
    auto bytes = from_hex(j.get<std::string>());
    if (!bytes) throw MalformedInput("transaction hex malformed");
    tx = Transaction::decode(*bytes);
}

}  // namespace spv::client
