#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "wsnsim/adversary.hpp"
#include "wsnsim/core.hpp"
#include "wsnsim/engine.hpp"
#include "wsnsim/metrics.hpp"
#include "wsnsim/scenario.hpp"

// LEACH and PEGASIS reference protocols on the same engine, radio, energy
// and metric substrate. Neither has any intruder-detection capability; under
// attack they keep routing by their own rules.

namespace wsnsim {

// Classic self-election threshold: p / (1 - p*(round mod ceil(1/p))) for
// nodes that have not led within the last ceil(1/p) rounds, else 0.
double leach_threshold(double p, int round, int rounds_since_ch);

struct Chain {
    std::vector<NodeId> order;  // permutation of alive node ids
    int leader_index = 0;
};

// Greedy chain: start from the node farthest from the BS, repeatedly append
// the nearest unvisited node (ties toward the lower id).
Chain pegasis_build_chain(const std::vector<const NodeState*>& nodes, Position bs_pos);

class LeachProtocol : public Protocol {
public:
    LeachProtocol(const Scenario& sc, MetricsLedger& ledger,
                  std::vector<SourcePlanEntry> sources);

    void start(Engine& eng) override;
    void on_deliver(Engine& eng, NodeId to, const Packet& pkt) override;
    void on_timer(Engine& eng, NodeId owner, int tag, std::int64_t arg) override;
    void on_round(Engine& eng, int round) override;

    int current_head_count() const { return static_cast<int>(heads_.size()); }

private:
    struct NodeInfo {
        NodeId head = kBroadcast;
        std::vector<SourceRecord> outbox;
        std::vector<SourceRecord> collected;  // head: member frames this round
        std::map<std::uint64_t, int> payload_by_uid;
    };

    bool attacking(const NodeState& n, double now) const;
    void elect(Engine& eng, int round);
    void evaluate_joins(Engine& eng);
    void schedule_frame(Engine& eng, int round);
    void member_slot(Engine& eng, NodeId id);
    void head_dispatch(Engine& eng, NodeId id);
    void adopt(NodeInfo& ni, const std::vector<SourceRecord>& recs);

    Scenario sc_;
    MetricsLedger& ledger_;
    std::vector<SourcePlanEntry> sources_;
    std::vector<NodeInfo> info_;
    std::vector<NodeId> heads_;
    std::map<NodeId, std::vector<std::pair<NodeId, double>>> adverts_heard_;
    std::map<NodeId, int> lure_load_;
    int current_round_ = 0;
    double round_start_s_ = 0.0;
};

class PegasisProtocol : public Protocol {
public:
    PegasisProtocol(const Scenario& sc, MetricsLedger& ledger,
                    std::vector<SourcePlanEntry> sources);

    void start(Engine& eng) override;
    void on_deliver(Engine& eng, NodeId to, const Packet& pkt) override;
    void on_timer(Engine& eng, NodeId owner, int tag, std::int64_t arg) override;
    void on_round(Engine& eng, int round) override;

    const Chain& chain() const { return chain_; }
    int chain_transmissions_last_round() const { return chain_tx_last_round_; }
    NodeId current_leader() const { return leader_; }

private:
    struct NodeInfo {
        std::vector<SourceRecord> outbox;
        std::vector<SourceRecord> pass_buffer;
        std::map<std::uint64_t, int> payload_by_uid;
    };

    bool attacking(const NodeState& n, double now) const;
    void rebuild_chain(Engine& eng);
    void chain_slot(Engine& eng, NodeId id, int round);
    void leader_dispatch(Engine& eng, NodeId id, int round);
    void adopt(NodeInfo& ni, const std::vector<SourceRecord>& recs);

    Scenario sc_;
    MetricsLedger& ledger_;
    std::vector<SourcePlanEntry> sources_;
    std::vector<NodeInfo> info_;
    Chain chain_;
    std::map<NodeId, int> chain_pos_;
    NodeId leader_ = kBroadcast;
    double hop_slot_s_ = 0.0;
    double pass_end_s_ = 0.0;
    int chain_tx_last_round_ = 0;
};

}  // namespace wsnsim
