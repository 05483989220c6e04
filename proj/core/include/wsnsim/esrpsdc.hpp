#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wsnsim/adversary.hpp"
#include "wsnsim/core.hpp"
#include "wsnsim/engine.hpp"
#include "wsnsim/metrics.hpp"
#include "wsnsim/scenario.hpp"

// The SNR-based dynamic clustering protocol: level assignment from the BS
// power sweep, energy-gated cluster-head election, SNR-driven joining with
// 1-hop/2-hop membership, TDMA data rounds with level-wise inter-cluster
// forwarding, head rotation/abdication, and the sink-side intruder
// detection/isolation procedure.

namespace wsnsim {

struct TdmaSchedule {
    double round_len_s = 0.0;
    std::vector<std::pair<NodeId, int>> slots;  // (member, slot index)
};

struct MemberId {
    std::vector<std::uint8_t> bytes;
    int depth = 0;  // 0 = CH, 1 = direct member, 2 = via relay
};

// Level from the beacon sweep: first (lowest) band whose upper limit covers
// the distance; boundaries are upper-inclusive. 0 when out of reach entirely.
int assign_level(double d_bs_m, const std::vector<LevelBand>& bands);

// Deterministic, size-balanced geographic partition: quantile strips on x,
// then quantile cells on y, row-major cluster ids. Cluster sizes differ by
// at most one for any deployment.
std::vector<std::vector<NodeId>> partition_clusters(
    const std::vector<const NodeState*>& nodes, int n_clusters);

struct ElectionResult {
    ChEntry ch;
    ChEntry next_ch;
    bool fallback = false;  // fewer than two nodes passed the threshold gate
};

// Threshold-gated election: every member draws once (in the order given) and
// is eligible when the draw lands under its Eq. 1 threshold; the two
// highest-energy eligibles become CH and next CH. With fewer than two
// eligibles the ranking falls back to all members. Ties break toward the
// lower id. Returns nothing for clusters with fewer than two live members.
std::optional<ElectionResult> elect_heads(
    const std::vector<const NodeState*>& members, int round,
    const ThresholdParams& params, const std::vector<LevelBand>& bands,
    Position bs_pos, const std::function<double()>& draw);

// Slot order: 2-hop members first (by id), then 1-hop members (by id), so a
// relay's own slot always follows its children's.
TdmaSchedule build_tdma(const std::vector<std::pair<NodeId, int>>& members_with_depth,
                        double slot_len_s);

class EsrpsdcProtocol : public Protocol {
public:
    EsrpsdcProtocol(const Scenario& sc, MetricsLedger& ledger,
                    std::vector<SourcePlanEntry> sources,
                    std::vector<NodeId> true_malicious);

    void start(Engine& eng) override;
    void on_deliver(Engine& eng, NodeId to, const Packet& pkt) override;
    void on_timer(Engine& eng, NodeId owner, int tag, std::int64_t arg) override;
    void on_round(Engine& eng, int round) override;

    // --- introspection for tests and invariant batteries ------------------
    const std::vector<ClusterTable>& cluster_tables() const { return tables_; }
    const std::set<NodeId>& blacklist() const { return blacklist_; }
    int orphan_count() const { return orphans_; }
    int fallback_elections() const { return fallback_elections_; }
    int fallback_route_hops() const { return fallback_route_hops_; }
    int detection_evasions() const { return evasions_; }
    int rejoin_waves() const { return rejoin_waves_; }
    const std::string& invariant_violation() const { return invariant_violation_; }
    NodeId parent_of(NodeId id) const { return info_[id].parent; }
    NodeId cluster_head_of(NodeId id) const;
    int depth_of(NodeId id) const { return info_[id].depth; }
    int cluster_of(NodeId id) const { return info_[id].cluster; }
    int sector_of(NodeId id) const { return info_[id].sector; }
    const MemberId& member_id_of(NodeId id) const { return info_[id].mid; }
    const std::vector<LevelBand>& bands() const { return bands_; }
    const TdmaSchedule& schedule_of_cluster(int cluster) const;
    std::vector<int> cascade_levels_seen() const { return cascade_level_trace_; }

private:
    struct NodeInfo {
        int sector = -1;           // static election constituency
        int cluster = -1;          // cluster actually joined this epoch
        NodeId parent = kBroadcast;  // CH or relay; kBroadcast = unjoined
        int depth = 0;
        MemberId mid;
        double parent_rssi_dbm = 0.0;
        double parent_power_dbm = 0.0;
        int hop_to_bs = -1;
        NodeId flood_parent = kBroadcast;
        int flood_seq_seen = -1;
        bool hello_seen = false;
        int detect_hops = -1;
        NodeId detect_parent = kBroadcast;
        int detect_seq_seen = -1;
        int blacklist_seq_seen = -1;
        int flood_copies = 0;
        int cascade_done_round = -1;
        std::vector<SourceRecord> outbox;       // own + adopted records
        std::vector<SourceRecord> round_buffer; // CH/relay: received this round
        std::vector<SourceRecord> held;         // aggregates for next round
        double ch_elect_energy = 0.0;
        NodeId last_next_hop = kBroadcast;
        std::map<std::uint64_t, int> payload_by_uid;
    };

    struct AdvertSeen {
        NodeId from = 0;
        double score_db = 0.0;  // measured snr + claimed bonus
        double rssi_dbm = 0.0;
        double tx_power_dbm = 0.0;
        int cluster = -1;
    };

    // epoch machinery
    void epoch_setup(Engine& eng, int round);
    void run_elections(Engine& eng, int round, const std::vector<int>& sectors);
    void send_adverts(Engine& eng);
    void evaluate_joins(Engine& eng);
    void send_state_msgs(Engine& eng);
    void evaluate_two_hop_joins(Engine& eng);
    void finalize_membership(Engine& eng);
    void check_membership_invariants(Engine& eng);

    // data path
    void schedule_round_traffic(Engine& eng, int round, double frame_start);
    void member_slot(Engine& eng, NodeId id);
    void cascade_dispatch(Engine& eng, NodeId ch_id);
    std::optional<std::pair<NodeId, double>> select_next_hop(Engine& eng, NodeId ch_id);
    void handle_rotation(Engine& eng, int round);
    void promote_or_reelect(Engine& eng, int sector, int round);

    // detection
    void run_detection(Engine& eng);
    void launch_wave(Engine& eng, const std::set<NodeId>& wave_ids, bool everyone);
    void evaluate_detection(Engine& eng);
    void isolate(Engine& eng, const std::set<NodeId>& suspects);

    // helpers
    bool attacking(const NodeState& n, double now) const;
    double unicast_power(Engine& eng, double d) const;
    double control_range(Engine& eng) const;
    void adopt_records(NodeInfo& ni, const std::vector<SourceRecord>& recs);
    static void adopt_into(std::vector<SourceRecord>& buf,
                           const std::vector<SourceRecord>& recs);
    void mark_transmitted(Engine& eng, NodeId id, const std::vector<SourceRecord>& recs);
    int frame_payload(const NodeInfo& ni, const std::vector<SourceRecord>& recs) const;
    void violate(const std::string& message);

    Scenario sc_;
    MetricsLedger& ledger_;
    std::vector<SourcePlanEntry> sources_;
    std::set<NodeId> true_malicious_;
    std::vector<LevelBand> bands_;
    std::vector<NodeInfo> info_;
    std::vector<int> sector_of_node_;
    std::vector<std::vector<NodeId>> sector_members_;
    std::vector<ClusterTable> tables_;
    std::vector<TdmaSchedule> schedules_;
    std::map<NodeId, TdmaSchedule> fake_schedules_;
    std::map<NodeId, std::vector<AdvertSeen>> adverts_heard_;
    std::map<NodeId, std::vector<AdvertSeen>> states_heard_;
    std::set<NodeId> blacklist_;
    std::map<NodeId, int> lure_load_;
    std::vector<FlowResponse> responses_;
    std::set<NodeId> queried_;
    std::vector<NodeId> current_wave_ids_;
    std::vector<NodeId> last_blacklist_delta_;
    int current_wave_bytes_ = 0;
    bool current_wave_everyone_ = false;
    bool escalated_ = false;
    int wave_count_ = 0;
    int flood_seq_ = 0;
    int detect_seq_ = 0;
    int blacklist_seq_ = 0;
    double last_detect_t_ = 0.0;
    int current_round_ = 0;
    double frame_start_s_ = 0.0;
    double intra_frame_len_s_ = 0.0;
    bool traffic_pending_ = false;
    int orphans_ = 0;
    int fallback_elections_ = 0;
    int fallback_route_hops_ = 0;
    int evasions_ = 0;
    int rejoin_waves_ = 0;
    std::string invariant_violation_;
    std::vector<int> cascade_level_trace_;
    int max_level_ = 1;
    bool detection_in_progress_ = false;
};

}  // namespace wsnsim
