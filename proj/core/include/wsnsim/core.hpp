#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

// Shared domain types and the pure arithmetic every other part of the
// simulator builds on: nodes, level bands, cluster tables, packets, and
// the cluster-head threshold / delivery-ratio / unit-conversion formulas.

namespace wsnsim {

using NodeId = std::uint32_t;

// Destination value meaning "every receivable node".
inline constexpr NodeId kBroadcast = 0xffffffffu;

struct Position {
    double x = 0.0;  // meters
    double y = 0.0;  // meters
};

double distance(const Position& a, const Position& b);

enum class Role {
    Member,
    ClusterHead,
    NextClusterHead,
    OneHopRelay,
    TwoHopMember,
    BaseStation,
    Malicious,
};

const char* role_name(Role r);

// A node that has never served as cluster head is always election-eligible.
inline constexpr int kNeverServed = std::numeric_limits<int>::max() / 2;

struct NodeState {
    NodeId id = 0;
    Position pos{};
    double energy_j = 0.0;       // current energy, E_cur(n)
    double energy_init_j = 0.0;  // initial energy, the paper's E_min(n)
    int level = 0;               // 0 = unassigned / unreachable
    Role role = Role::Member;
    int rounds_since_ch = kNeverServed;
    std::vector<std::uint8_t> member_id;  // cluster-local hierarchical id
    bool awake = true;
    bool malicious = false;  // marked at injection; role flips at activation

    bool alive() const { return role == Role::BaseStation || energy_j > 0.0; }
};

struct LevelBand {
    int level = 0;     // 1-based ring index
    double lower_m = 0.0;  // L_i
    double upper_m = 0.0;  // U_i
};

struct ThresholdParams {
    double p = 0.05;  // desired cluster-head fraction, P in (0,1)
    double c = 0.5;   // constant factor, C in (0,1]
    double k = 2.0;   // energy exponent, K in [0,3]
};

struct ChEntry {
    NodeId id = 0;
    double energy_j = 0.0;
};

struct ClusterTable {
    int cluster_id = 0;
    int active_count = 0;
    int sleep_count = 0;
    std::optional<ChEntry> ch;       // null until a head is elected
    std::optional<ChEntry> next_ch;  // standby successor
};

enum class PacketKind {
    Req,
    LevelBeacon,
    Hello,
    ChAdvert,
    JoinConfirm,
    StateMsg,
    Abdicate,
    TdmaSchedule,
    Data,
    Aggregate,
    DetectRequest,
    DetectResponse,
};

const char* packet_kind_name(PacketKind k);

// Provenance of one source-originated data packet, carried inside Data and
// Aggregate frames so the base station can credit N_r per distinct source.
struct SourceRecord {
    std::uint64_t uid = 0;
    NodeId origin = 0;
    double created_s = 0.0;
};

struct Packet {
    PacketKind kind = PacketKind::Data;
    NodeId src = 0;
    NodeId dst = kBroadcast;
    int payload_bytes = 0;
    double created_s = 0.0;
    int hops = 0;

    // Kind-specific fields. Control messages are small; keeping them flat
    // beats a variant for a simulator that copies packets per receiver.
    int level = 0;              // LevelBeacon index / advertised level
    int hops_to_bs = 0;         // advertised route cost (DetectResponse: cost)
    double tx_power_dbm = 0.0;  // power the frame was sent with (for RSSI math)
    double snr_bonus_db = 0.0;  // claimed link-quality bonus (0 when honest)
    int cluster_id = -1;
    NodeId subject = 0;         // StateMsg: my CH; DetectResponse: next hop
    std::vector<SourceRecord> sources;  // Data/Aggregate provenance
    std::vector<NodeId> id_list;        // DetectRequest affected set, blacklist
    std::vector<LevelBand> bands;       // Hello payload

    int bits() const { return payload_bytes * 8; }
};

// Eq. 1 cluster-head eligibility threshold, clamped into [0,1].
//   T_i(n) = [P*C*(U_i - d)] / [(1-P)*f(r)*(U_i - L_i)] * (E_cur/E_init)^K
// with f(r) = max(1, r mod ceil(1/P)) and d clamped into [L_i, U_i].
// Returns 0 for nodes outside the Z set (served as CH within ceil(1/P)
// rounds) and for dead nodes.
double ch_threshold(const NodeState& node, int round, const LevelBand& band,
                    const ThresholdParams& params, double d_bs_m);

// Rounds a node must sit out after serving as CH: ceil(1/P).
int z_window_rounds(double p);

// Eq. 2 packet delivery ratio, N_r / N_t.
double pdr(std::int64_t n_received, std::int64_t n_transmitted);

// 1 mWh = 3.6 J.
double joules_to_mwh(double e_j);

}  // namespace wsnsim
