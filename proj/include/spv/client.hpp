// Copyright (c) 2026 The spvkit developers
// Licensed under the Apache License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spv/chain.hpp"
#include "spv/merkle.hpp"
#include "spv/transaction.hpp"

namespace spv::client {

// ---- configuration -------------------------------------------------------------

struct PollParams {
    double tau_min_s = 60.0;
    double tau_max_s = 3600.0;
    double kappa = 1.0;
    double lambda_weight = 1.0;
    std::size_t window_w = 16;  // samples considered; >= 2
};

struct OrphanParams {
    double ttl_s = 600.0;
    std::size_t max_depth = 25;
    std::size_t max_size = 10000;
};

// Pluggable lock/unlock check. The default test scheme treats the lock
// condition as the hash of a secret and the witness as its preimage.
using WitnessChecker = std::function<bool(const Bytes& lock, const Bytes& unlock)>;

inline bool preimage_witness_ok(const Bytes& lock, const Bytes& unlock) {
    Hash h = sha256d(unlock);
    return lock.size() == h.size() && std::equal(lock.begin(), lock.end(), h.begin());
}

struct ClientConfig {
    chain::ChainParams params;
    std::size_t anomaly_window = 32;     // tip hashes remembered for rollback detection
    std::size_t confirm_threshold = 6;   // d*
    OrphanParams orphan;
    WitnessChecker witness_ok = preimage_witness_ok;
};

// ---- state ----------------------------------------------------------------------

struct ProofRecord {
    merkle::Proof proof;
    std::size_t block_index = 0;
};

struct OrphanEntry {
    Transaction tx;
    double arrival_s = 0;
    std::set<Hash> unresolved;  // parent txids not yet known
    std::size_t depth = 1;      // length of the pending-ancestor path, this entry included
};

struct OrphanBuffer {
    std::map<Hash, OrphanEntry> entries;
    std::map<Hash, std::set<Hash>> waiters;  // awaited parent txid -> buffered children
};

// SPV automaton state: header chain, proof store, verdict map, orphan buffer
// and the sliding window of recently observed tips. Single-writer; copy the
// value for concurrent read-only snapshots.
struct ClientState {
    ClientConfig config;
    chain::HeaderChain chain;
    std::map<Hash, ProofRecord> proofs;
    std::map<Hash, bool> verdicts;  // absent key = null
    std::set<Hash> known_txs;       // verified or resolved transaction ids
    OrphanBuffer orphans;
    std::deque<Hash> anomaly_window;
};

inline ClientState init_client(const chain::BlockHeader& genesis, ClientConfig config) {
    if (chain::validate_header(nullptr, genesis, config.params.network_target) !=
        chain::Verdict::Ok)
        throw InvalidGenesis();
    ClientState state;
    state.config = std::move(config);
    state.chain.headers.push_back(genesis);
    state.chain.work = chain::unit_work(state.config.params.network_target);
    state.anomaly_window.push_back(chain::header_hash(genesis));
    return state;
}

// ---- orphan resolution ------------------------------------------------------------

// Marks a txid known and recursively promotes every buffered descendant whose
// unresolved set drains. Returns the promoted txids in resolution order.
inline std::vector<Hash> mark_known(ClientState& s, const Hash& txid) {
    std::vector<Hash> promoted;
    std::deque<Hash> queue;
    if (s.known_txs.insert(txid).second) queue.push_back(txid);
    while (!queue.empty()) {
        Hash t = queue.front();
        queue.pop_front();
        auto w = s.orphans.waiters.find(t);
        if (w == s.orphans.waiters.end()) continue;
        std::set<Hash> children = std::move(w->second);
        s.orphans.waiters.erase(w);
        for (const Hash& child : children) {
            auto e = s.orphans.entries.find(child);
            if (e == s.orphans.entries.end()) continue;
            e->second.unresolved.erase(t);
            if (e->second.unresolved.empty()) {
                s.orphans.entries.erase(e);
                s.known_txs.insert(child);
                promoted.push_back(child);
                queue.push_back(child);
            }
        }
    }
    return promoted;
}

// ---- transaction verification (Algorithm: fold the txid through the proof) --------

// True iff the stored proof for txid still reproduces the Merkle root of its
// recorded block under the current chain.
inline bool proof_still_valid(const ClientState& s, const Hash& txid) {
    auto it = s.proofs.find(txid);
    if (it == s.proofs.end()) return false;
    if (it->second.block_index >= s.chain.size()) return false;
    return merkle::verify_proof(txid, it->second.proof,
                                s.chain.headers[it->second.block_index].merkle_root);
}

// Pure header-and-proof check: no signature validation, no script execution,
// and no state consulted beyond the local chain. Records the verdict; a true
// verdict is never clobbered while its proof remains valid.
inline bool verify_spv(ClientState& s, const Hash& tx_id, const merkle::Proof& proof,
                       std::size_t block_index) {
    if (block_index >= s.chain.size()) throw IndexOutOfRange("block index beyond chain tip");
    bool ok = merkle::verify_proof(tx_id, proof, s.chain.headers[block_index].merkle_root);
    if (ok) {
        s.proofs[tx_id] = ProofRecord{proof, block_index};
        s.verdicts[tx_id] = true;
        mark_known(s, tx_id);
    } else {
        auto v = s.verdicts.find(tx_id);
        bool keep = v != s.verdicts.end() && v->second && proof_still_valid(s, tx_id);
        if (!keep) s.verdicts[tx_id] = false;
    }
    return ok;
}

// Conf_T = n - k + 1 for a currently valid proof in block k of an n-tip
// chain; 0 once the proof no longer holds under the current chain.
inline std::size_t confirmations(const ClientState& s, const Hash& tx_id) {
    if (!proof_still_valid(s, tx_id)) return 0;
    return s.chain.size() - s.proofs.at(tx_id).block_index;
}

inline bool is_final(const ClientState& s, const Hash& tx_id) {
    return confirmations(s, tx_id) >= s.config.confirm_threshold;
}

// ---- header ingestion ---------------------------------------------------------------

struct IngestReport {
    std::vector<chain::Verdict> verdicts;  // per incoming header, up to the first failure
    std::size_t appended = 0;              // headers adopted beyond the fork point
    bool adopted = false;
    bool reorged = false;
    std::size_t reorg_depth = 0;           // headers removed from the previous chain
    bool rollback_anomaly = false;
    std::vector<Hash> invalidated;         // txids whose verdicts reverted to null
};

// Extends the chain with the valid prefix of `incoming`, or adopts a competing
// branch when it is consistent and carries strictly greater cumulative work.
// Displaced inclusion proofs revert to null and read zero confirmations; a
// rollback anomaly is flagged when a tip recorded in the sliding window
// disappears from the chain.
inline IngestReport ingest_headers(ClientState& s, std::span<const chain::BlockHeader> incoming) {
    IngestReport report;
    if (incoming.empty()) return report;

    // Anchor: the chain position the incoming branch attaches to.
    std::ptrdiff_t anchor = -2;
    if (incoming[0].prev_hash == kZeroHash) {
        anchor = -1;  // candidate chain from genesis
    } else {
        for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(s.chain.size()) - 1; j >= 0; --j) {
            if (chain::header_hash(s.chain.headers[static_cast<std::size_t>(j)]) ==
                incoming[0].prev_hash) {
                anchor = j;
                break;
            }
        }
    }
    if (anchor == -2) {
        report.verdicts.push_back(chain::Verdict::Linkage);
        return report;
    }

    std::vector<chain::BlockHeader> candidate_input(
        s.chain.headers.begin(), s.chain.headers.begin() + (anchor + 1));
    candidate_input.insert(candidate_input.end(), incoming.begin(), incoming.end());

    std::vector<chain::Verdict> all_verdicts;
    chain::HeaderChain candidate =
        chain::parse_chain(candidate_input, s.config.params, &all_verdicts);
    report.verdicts.assign(all_verdicts.begin() + (anchor + 1), all_verdicts.end());

    std::size_t prefix_len = static_cast<std::size_t>(anchor + 1);
    std::size_t accepted = candidate.size() - prefix_len;

    bool extension = prefix_len == s.chain.size();
    bool adopt = false;
    if (extension) {
        adopt = accepted > 0;
    } else {
        adopt = accepted > 0 && candidate.work > s.chain.work;  // ties keep the current chain
    }
    if (!adopt) return report;

    std::size_t removed = s.chain.size() - prefix_len;
    if (removed > 0) {
        report.reorged = true;
        report.reorg_depth = removed;
        // Rollback anomaly: a tip we recorded is about to leave the chain.
        std::set<Hash> removed_hashes;
        for (std::size_t i = prefix_len; i < s.chain.size(); ++i)
            removed_hashes.insert(chain::header_hash(s.chain.headers[i]));
        for (const Hash& seen : s.anomaly_window)
            if (removed_hashes.count(seen)) {
                report.rollback_anomaly = true;
                break;
            }
        for (const auto& [txid, rec] : s.proofs) {
            if (rec.block_index >= prefix_len && s.verdicts.count(txid)) {
                s.verdicts.erase(txid);  // true/false -> null
                report.invalidated.push_back(txid);
            }
        }
    }

    s.chain = std::move(candidate);
    report.adopted = true;
    report.appended = accepted;

    s.anomaly_window.push_back(chain::header_hash(s.chain.tip()));
    while (s.anomaly_window.size() > s.config.anomaly_window) s.anomaly_window.pop_front();
    return report;
}

// ---- bundle acceptance -----------------------------------------------------------------

// Payment transaction plus its parents, their inclusion proofs and block
// references: everything a counterparty needs for autonomous verification.
struct ProofBundle {
    Transaction payment;
    std::vector<Transaction> parents;
    std::vector<ProofRecord> parent_proofs;
};

enum class AcceptMode { inclusion_only, strict };

enum class CheckFailure { ParentInclusion, MissingParentOutput, BadWitness, LocalDoubleSpend };

inline const char* check_failure_name(CheckFailure f) {
    switch (f) {
        case CheckFailure::ParentInclusion: return "ParentInclusion";
        case CheckFailure::MissingParentOutput: return "MissingParentOutput";
        case CheckFailure::BadWitness: return "BadWitness";
        case CheckFailure::LocalDoubleSpend: return "LocalDoubleSpend";
    }
    return "?";
}

struct Decision {
    bool accepted = false;
    std::vector<bool> parent_inclusion;      // per listed parent
    std::vector<CheckFailure> failures;      // distinct failure classes
};

// inclusion_only: accept iff every parent proves inclusion in the chain.
// strict additionally requires each payment input to reference an existing
// parent output, the unlock witness to satisfy the lock condition, and no two
// inputs to spend the same parent output.
inline Decision accept_transaction(ClientState& s, const ProofBundle& bundle, AcceptMode mode) {
    Decision d;
    bool parents_ok = true;
    for (std::size_t i = 0; i < bundle.parents.size(); ++i) {
        bool ok = false;
        if (i < bundle.parent_proofs.size() &&
            bundle.parent_proofs[i].block_index < s.chain.size()) {
            ok = verify_spv(s, bundle.parents[i].id(), bundle.parent_proofs[i].proof,
                            bundle.parent_proofs[i].block_index);
        }
        d.parent_inclusion.push_back(ok);
        parents_ok = parents_ok && ok;
    }
    if (!parents_ok) d.failures.push_back(CheckFailure::ParentInclusion);

    if (mode == AcceptMode::strict) {
        std::map<Hash, const Transaction*> by_id;
        for (const Transaction& p : bundle.parents) by_id[p.id()] = &p;
        bool missing = false, bad_witness = false, double_spend = false;
        std::set<std::pair<Hash, std::uint32_t>> spent;
        for (const TxIn& in : bundle.payment.inputs) {
            auto p = by_id.find(in.parent_txid);
            if (p == by_id.end() || in.output_index >= p->second->outputs.size()) {
                missing = true;
            } else if (!s.config.witness_ok(p->second->outputs[in.output_index].lock_condition,
                                            in.unlock_witness)) {
                bad_witness = true;
            }
            if (!spent.insert({in.parent_txid, in.output_index}).second) double_spend = true;
        }
        if (missing) d.failures.push_back(CheckFailure::MissingParentOutput);
        if (bad_witness) d.failures.push_back(CheckFailure::BadWitness);
        if (double_spend) d.failures.push_back(CheckFailure::LocalDoubleSpend);
    }

    d.accepted = d.failures.empty();
    if (d.accepted) mark_known(s, bundle.payment.id());
    return d;
}

// ---- orphan buffer --------------------------------------------------------------------

enum class OrphanOutcome { Resolved, Buffered, BufferFull, DepthExceeded, Ticked };

struct OrphanReport {
    OrphanOutcome outcome = OrphanOutcome::Ticked;
    std::vector<Hash> promoted;
    std::size_t evicted = 0;
};

inline OrphanReport orphan_submit(ClientState& s, const Transaction& tx, double now_s) {
    OrphanReport report;
    Hash txid = tx.id();
    if (s.orphans.entries.count(txid)) {
        report.outcome = OrphanOutcome::Buffered;
        return report;
    }
    std::set<Hash> unresolved;
    for (const TxIn& in : tx.inputs)
        if (!s.known_txs.count(in.parent_txid)) unresolved.insert(in.parent_txid);
    if (unresolved.empty()) {
        report.outcome = OrphanOutcome::Resolved;
        report.promoted = mark_known(s, txid);
        return report;
    }
    std::size_t depth = 1;
    for (const Hash& p : unresolved) {
        auto e = s.orphans.entries.find(p);
        if (e != s.orphans.entries.end()) depth = std::max(depth, e->second.depth + 1);
    }
    if (depth > s.config.orphan.max_depth) {
        report.outcome = OrphanOutcome::DepthExceeded;
        return report;
    }
    if (s.orphans.entries.size() >= s.config.orphan.max_size) {
        report.outcome = OrphanOutcome::BufferFull;
        return report;
    }
    for (const Hash& p : unresolved) s.orphans.waiters[p].insert(txid);
    s.orphans.entries.emplace(txid, OrphanEntry{tx, now_s, std::move(unresolved), depth});
    report.outcome = OrphanOutcome::Buffered;
    return report;
}

inline OrphanReport orphan_tick(ClientState& s, double now_s) {
    OrphanReport report;
    for (auto it = s.orphans.entries.begin(); it != s.orphans.entries.end();) {
        if (it->second.arrival_s + s.config.orphan.ttl_s < now_s) {
            it = s.orphans.entries.erase(it);
            ++report.evicted;
        } else {
            ++it;
        }
    }
    return report;
}

// ---- adaptive polling --------------------------------------------------------------------

// clamp(kappa * mean + lambda * stddev, tau_min, tau_max) over the last
// window_w inter-header arrival samples; unbiased (n-1) sample variance.
inline double next_poll_interval(std::span<const double> samples, const PollParams& params) {
    if (params.tau_min_s <= 0 || params.tau_min_s > params.tau_max_s || params.window_w < 2)
        throw MalformedInput("bad poll parameters");
    if (samples.size() < 2) return params.tau_max_s;
    std::size_t n = std::min(samples.size(), params.window_w);
    auto window = samples.subspan(samples.size() - n, n);
    double mean = 0;
    for (double x : window) mean += x;
    mean /= static_cast<double>(n);
    double var = 0;
    for (double x : window) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n - 1);
    double tau = params.kappa * mean + params.lambda_weight * std::sqrt(var);
    return std::clamp(tau, params.tau_min_s, params.tau_max_s);
}

// ---- peer discovery ------------------------------------------------------------------------

using PeerId = std::string;
using AddressOracle = std::function<std::vector<PeerId>(const PeerId&)>;

// Breadth-first closure of the address oracle: at most max_depth levels, at
// most max_per_round new peers admitted per level, levels visited in sorted
// order so the result is deterministic.
inline std::set<PeerId> discover_peers(const std::vector<PeerId>& seeds,
                                       const AddressOracle& oracle, std::size_t max_depth,
                                       std::size_t max_per_round) {
    std::set<PeerId> visited(seeds.begin(), seeds.end());
    std::vector<PeerId> frontier(visited.begin(), visited.end());
    for (std::size_t depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
        std::set<PeerId> fresh;
        for (const PeerId& peer : frontier)
            for (PeerId neighbor : oracle(peer))
                if (!visited.count(neighbor)) fresh.insert(std::move(neighbor));
        std::vector<PeerId> admitted;
        for (const PeerId& p : fresh) {
            if (admitted.size() >= max_per_round) break;
            admitted.push_back(p);
        }
        visited.insert(admitted.begin(), admitted.end());
        frontier = std::move(admitted);
    }
    return visited;
}

// ---- divergence alerts -----------------------------------------------------------------------

struct DivergenceAlert {
    std::optional<std::size_t> first_divergence;  // lowest index where any two views differ
    std::optional<Hash> majority_tip;             // tip agreed by a strict majority, if any
    std::vector<PeerId> dissenting;               // peers off the majority tip
};

// Alert only: flags where peer views of the header chain split and which tip
// a strict majority supports. Enforces no rejection.
inline DivergenceAlert detect_divergence(
    const std::map<PeerId, std::vector<chain::BlockHeader>>& views) {
    DivergenceAlert alert;
    std::map<PeerId, std::vector<Hash>> hashes;
    for (const auto& [peer, headers] : views) {
        std::vector<Hash> hs;
        hs.reserve(headers.size());
        for (const auto& h : headers) hs.push_back(chain::header_hash(h));
        hashes.emplace(peer, std::move(hs));
    }

    for (auto a = hashes.begin(); a != hashes.end(); ++a) {
        for (auto b = std::next(a); b != hashes.end(); ++b) {
            std::size_t common = std::min(a->second.size(), b->second.size());
            for (std::size_t i = 0; i < common; ++i) {
                if (a->second[i] != b->second[i]) {
                    if (!alert.first_divergence || i < *alert.first_divergence)
                        alert.first_divergence = i;
                    break;
                }
            }
        }
    }

    std::map<Hash, std::size_t> tip_votes;
    for (const auto& [peer, hs] : hashes)
        if (!hs.empty()) tip_votes[hs.back()]++;
    for (const auto& [tip, votes] : tip_votes) {
        if (votes * 2 > views.size()) {
            alert.majority_tip = tip;
            break;
        }
    }
    if (alert.majority_tip) {
        for (const auto& [peer, hs] : hashes)
            if (hs.empty() || hs.back() != *alert.majority_tip) alert.dissenting.push_back(peer);
    }
    return alert;
}

// ---- JSON -------------------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const ProofRecord& r) {
    j = nlohmann::json{{"proof", r.proof}, {"block_index", r.block_index}};
}

inline void from_json(const nlohmann::json& j, ProofRecord& r) {
    r.proof = j.at("proof").get<merkle::Proof>();
    r.block_index = j.at("block_index").get<std::size_t>();
}

inline void to_json(nlohmann::json& j, const ProofBundle& b) {
    j = nlohmann::json{
        {"payment", b.payment}, {"parents", b.parents}, {"parent_proofs", b.parent_proofs}};
}

inline void from_json(const nlohmann::json& j, ProofBundle& b) {
    b.payment = j.at("payment").get<Transaction>();
    b.parents = j.at("parents").get<std::vector<Transaction>>();
    b.parent_proofs = j.at("parent_proofs").get<std::vector<ProofRecord>>();
}

inline void to_json(nlohmann::json& j, const Decision& d) {
    nlohmann::json failures = nlohmann::json::array();
    for (CheckFailure f : d.failures) failures.push_back(check_failure_name(f));
    j = nlohmann::json{{"accepted", d.accepted},
                       {"parent_inclusion", d.parent_inclusion},
                       {"failures", std::move(failures)}};
}

}  // namespace spv::client
