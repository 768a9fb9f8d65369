// Copyright (c) 2026 The spvkit developers
// Licensed under the Apache License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstddef>
#include <span>

#include "spv/chain.hpp"
#include "spv/merkle.hpp"

namespace spv::chain {

// Compressed header tree: a Merkle commitment over header hashes, giving
// O(log n) header-inclusion proofs against a single 32-byte root.
struct ChtCommitment {
    Hash root{};
    std::size_t leaf_count = 0;

    bool operator==(const ChtCommitment&) const = default;
};

// Leaf payload is the 32-byte header hash; the tree applies the usual
// leaf/interior domain separation on top.
inline merkle::Tree<> cht_tree(std::span<const BlockHeader> headers) {
    if (headers.empty()) throw EmptyLeafSet("cannot commit to zero headers");
    std::vector<Hash> leaves;
    leaves.reserve(headers.size());
    for (const BlockHeader& h : headers) {
        Hash hh = header_hash(h);
        leaves.push_back(merkle::leaf_hash(ByteSpan{hh.data(), hh.size()}));
    }
    return merkle::build_from_leaf_hashes(leaves);
}

inline ChtCommitment cht_commit(std::span<const BlockHeader> headers) {
    auto tree = cht_tree(headers);
    return ChtCommitment{tree.root(), tree.leaf_count};
}

inline merkle::Proof cht_prove(std::span<const BlockHeader> headers, std::size_t index) {
    if (index >= headers.size()) throw IndexOutOfRange("header index beyond chain");
    auto tree = cht_tree(headers);
    return merkle::prove(tree, index);
}

inline bool cht_verify(const BlockHeader& header, const merkle::Proof& proof,
                       const ChtCommitment& commitment) {
    Hash hh = header_hash(header);
    Hash leaf = merkle::leaf_hash(ByteSpan{hh.data(), hh.size()});
    return merkle::verify_proof(leaf, proof, commitment.root);
}

}  // namespace spv::chain
