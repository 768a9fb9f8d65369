// Copyright (c) 2026 The spvkit developers
// Licensed under the Apache License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "spv/bytes.hpp"
#include "spv/errors.hpp"
#include "spv/sha256.hpp"

namespace spv::merkle {

// One hop of an inclusion proof: the sibling digest and which side it sits on.
struct ProofStep {
    Hash sibling{};
    bool sibling_is_right = false;

    bool operator==(const ProofStep&) const = default;
};

// Bottom-up sibling path. Replaying the steps from the leaf digest must
// reproduce the root; length is ceil(log2(leaf_count)) of the generating tree.
struct Proof {
    std::size_t leaf_index = 0;
    std::vector<ProofStep> steps;

    bool operator==(const Proof&) const = default;
};

// Leaf and interior nodes are domain-separated (0x00 / 0x01 prefixes) so a
// leaf payload can never be confused with an encoded pair of child digests.
template <class Hasher = Sha256dHasher>
Hash leaf_hash(ByteSpan payload) {
    Bytes buf;
    buf.reserve(payload.size() + 1);
    buf.push_back(0x00);
    buf.insert(buf.end(), payload.begin(), payload.end());
    return Hasher::digest(buf);
}

template <class Hasher = Sha256dHasher>
Hash node_hash(const Hash& left, const Hash& right) {
    Bytes buf;
    buf.reserve(65);
    buf.push_back(0x01);
    buf.insert(buf.end(), left.begin(), left.end());
    buf.insert(buf.end(), right.begin(), right.end());
    return Hasher::digest(buf);
}

// Binary hash tree. levels[0] holds the leaf digests; an odd-width level
// duplicates its last element as the right sibling; the top level is the root.
template <class Hasher = Sha256dHasher>
struct Tree {
    std::vector<std::vector<Hash>> levels;
    std::size_t leaf_count = 0;

    const Hash& root() const { return levels.back().front(); }
};

template <class Hasher = Sha256dHasher>
Tree<Hasher> build_from_leaf_hashes(std::span<const Hash> leaf_hashes) {
    if (leaf_hashes.empty()) throw EmptyLeafSet();
    Tree<Hasher> tree;
    tree.leaf_count = leaf_hashes.size();
    tree.levels.emplace_back(leaf_hashes.begin(), leaf_hashes.end());
    while (tree.levels.back().size() > 1) {
        const auto& below = tree.levels.back();
        std::vector<Hash> level;
        level.reserve((below.size() + 1) / 2);
        for (std::size_t j = 0; j < below.size(); j += 2) {
            const Hash& left = below[j];
            const Hash& right = (j + 1 < below.size()) ? below[j + 1] : below[j];
            level.push_back(node_hash<Hasher>(left, right));
        }
        tree.levels.push_back(std::move(level));
    }
    return tree;
}

template <class Hasher = Sha256dHasher>
Tree<Hasher> build_tree(std::span<const Bytes> leaves) {
    if (leaves.empty()) throw EmptyLeafSet();
    std::vector<Hash> hashes;
    hashes.reserve(leaves.size());
    for (const Bytes& leaf : leaves) hashes.push_back(leaf_hash<Hasher>(leaf));
    return build_from_leaf_hashes<Hasher>(hashes);
}

template <class Hasher>
Proof prove(const Tree<Hasher>& tree, std::size_t index) {
    if (index >= tree.leaf_count) throw IndexOutOfRange("leaf index beyond tree");
    Proof proof;
    proof.leaf_index = index;
    std::size_t idx = index;
    for (std::size_t lvl = 0; lvl + 1 < tree.levels.size(); ++lvl) {
        const auto& level = tree.levels[lvl];
        bool is_left = (idx % 2 == 0);
        std::size_t sibling = is_left ? idx + 1 : idx - 1;
        if (sibling >= level.size()) sibling = idx;  // odd width: last node pairs with itself
        proof.steps.push_back({level[sibling], is_left});
        idx /= 2;
    }
    return proof;
}

// Folds the leaf digest through the sibling path. Consults nothing but its
// arguments; malformed proofs simply fail to reproduce the root.
template <class Hasher = Sha256dHasher>
bool verify_proof(const Hash& leaf, const Proof& proof, const Hash& root) {
    Hash h = leaf;
    for (const ProofStep& step : proof.steps)
        h = step.sibling_is_right ? node_hash<Hasher>(h, step.sibling)
                                  : node_hash<Hasher>(step.sibling, h);
    return h == root;
}

inline void to_json(nlohmann::json& j, const Proof& p) {
    nlohmann::json steps = nlohmann::json::array();
    for (const ProofStep& s : p.steps)
        steps.push_back({{"sibling_hex", to_hex(s.sibling)}, {"is_right", s.sibling_is_right}});
    j = nlohmann::json{{"leaf_index", p.leaf_index}, {"steps", std::move(steps)}};
}

inline void from_json(const nlohmann::json& j, Proof& p) {
    p.leaf_index = j.at("leaf_index").get<std::size_t>();
    p.steps.clear();
    for (const auto& s : j.at("steps")) {
        ProofStep step;
        step.sibling = hash_from_hex(s.at("sibling_hex").get<std::string>());
        step.sibling_is_right = s.at("is_right").get<bool>();
        p.steps.push_back(step);
    }
}

}  // namespace spv::merkle
