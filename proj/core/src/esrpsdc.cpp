#include "wsnsim/esrpsdc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wsnsim {

namespace {

// timer tags
enum : int {
    kTmReqFlood = 1,
    kTmBeacon,
    kTmHello,
    kTmElect,
    kTmAdvert,
    kTmJoinEval,
    kTmStateBcast,
    kTmJoin2Eval,
    kTmFinalize,
    kTmSlot,
    kTmCascade,
    kTmSource,
    kTmActivate,
    kTmRebroadcast,
    kTmRespond,
    kTmDetectEval,
    kTmRejoinAdvert,
    kTmRejoinEval,
    kTmRejoinState,
    kTmRejoin2Eval,
    kTmRejoinFinalize,
};

// phases for the trace
enum : int { kPhInit = 0, kPhElection = 1, kPhJoining = 2, kPhDataRounds = 3 };

// control frame sizes (bytes)
constexpr int kReqBytes = 8;
constexpr int kBeaconBytes = 8;
constexpr int kAdvertBytes = 10;
constexpr int kJoinBytes = 8;
constexpr int kStateBytes = 12;
constexpr int kAbdicateBytes = 8;
constexpr int kElectReportBytes = 12;
constexpr int kResponseBytes = 12;

constexpr double kFirstRound = 2.0;
constexpr double kGuardS = 1e-3;
constexpr int kFloodRelayMark = -7;  // aggregate descending the flood tree

constexpr NodeId kBsId = 0;

}  // namespace

int assign_level(double d_bs_m, const std::vector<LevelBand>& bands) {
    for (const auto& b : bands)
        if (d_bs_m <= b.upper_m) return b.level;  // upper-inclusive
    return 0;
}

std::vector<std::vector<NodeId>> partition_clusters(
    const std::vector<const NodeState*>& nodes, int n_clusters) {
    if (n_clusters < 1) throw std::invalid_argument("partition: n_clusters must be >= 1");
    if (static_cast<int>(nodes.size()) < n_clusters)
        throw std::invalid_argument("partition: fewer nodes than clusters");

    // Near-square factor pair, cols >= rows.
    int rows = 1;
    for (int r = 1; r * r <= n_clusters; ++r)
        if (n_clusters % r == 0) rows = r;
    const int cols = n_clusters / rows;

    std::vector<const NodeState*> by_x(nodes);
    std::sort(by_x.begin(), by_x.end(), [](const NodeState* a, const NodeState* b) {
        if (a->pos.x != b->pos.x) return a->pos.x < b->pos.x;
        return a->id < b->id;
    });

    std::vector<std::vector<NodeId>> clusters(n_clusters);
    const std::size_t n = by_x.size();
    std::size_t consumed = 0;
    for (int c = 0; c < cols; ++c) {
        // Quantile strips: sizes differ by at most one.
        const std::size_t strip_n = n * (c + 1) / cols - n * c / cols;
        std::vector<const NodeState*> strip(by_x.begin() + consumed,
                                            by_x.begin() + consumed + strip_n);
        consumed += strip_n;
        std::sort(strip.begin(), strip.end(), [](const NodeState* a, const NodeState* b) {
            if (a->pos.y != b->pos.y) return a->pos.y < b->pos.y;
            return a->id < b->id;
        });
        std::size_t cell_consumed = 0;
        for (int r = 0; r < rows; ++r) {
            const std::size_t cell_n =
                strip_n * (r + 1) / rows - strip_n * r / rows;
            auto& cl = clusters[c * rows + r];
            for (std::size_t i = 0; i < cell_n; ++i)
                cl.push_back(strip[cell_consumed + i]->id);
            cell_consumed += cell_n;
            std::sort(cl.begin(), cl.end());
        }
    }
    return clusters;
}

std::optional<ElectionResult> elect_heads(
    const std::vector<const NodeState*>& members, int round,
    const ThresholdParams& params, const std::vector<LevelBand>& bands,
    Position bs_pos, const std::function<double()>& draw) {
    std::vector<const NodeState*> alive;
    for (const auto* m : members)
        if (m->alive() && m->awake) alive.push_back(m);
    if (alive.size() < 2) return std::nullopt;

    std::sort(alive.begin(), alive.end(),
              [](const NodeState* a, const NodeState* b) { return a->id < b->id; });

    std::vector<const NodeState*> eligible;
    for (const auto* m : alive) {
        const double u = draw();
        const LevelBand* band = nullptr;
        for (const auto& b : bands)
            if (b.level == m->level) band = &b;
        if (!band) continue;
        const double t = ch_threshold(*m, round, *band, params,
                                      distance(m->pos, bs_pos));
        if (u < t) eligible.push_back(m);
    }

    const bool fallback = eligible.size() < 2;
    auto& pool = fallback ? alive : eligible;
    auto rank = [](const NodeState* a, const NodeState* b) {
        if (a->energy_j != b->energy_j) return a->energy_j > b->energy_j;
        return a->id < b->id;
    };
    std::sort(pool.begin(), pool.end(), rank);

    ElectionResult res;
    res.ch = {pool[0]->id, pool[0]->energy_j};
    res.next_ch = {pool[1]->id, pool[1]->energy_j};
    res.fallback = fallback;
    return res;
}

TdmaSchedule build_tdma(const std::vector<std::pair<NodeId, int>>& members_with_depth,
                        double slot_len_s) {
    std::vector<NodeId> two_hop, one_hop;
    for (const auto& [id, depth] : members_with_depth)
        (depth >= 2 ? two_hop : one_hop).push_back(id);
    std::sort(two_hop.begin(), two_hop.end());
    std::sort(one_hop.begin(), one_hop.end());

    TdmaSchedule sched;
    int idx = 0;
    for (NodeId id : two_hop) sched.slots.emplace_back(id, idx++);
    for (NodeId id : one_hop) sched.slots.emplace_back(id, idx++);
    sched.round_len_s = slot_len_s * static_cast<double>(idx);
    return sched;
}

// ---------------------------------------------------------------------------

EsrpsdcProtocol::EsrpsdcProtocol(const Scenario& sc, MetricsLedger& ledger,
                                 std::vector<SourcePlanEntry> sources,
                                 std::vector<NodeId> true_malicious)
    : sc_(sc), ledger_(ledger), sources_(std::move(sources)) {
    true_malicious_.insert(true_malicious.begin(), true_malicious.end());
    bands_ = derive_level_bands(sc_.radio);
    max_level_ = static_cast<int>(bands_.size());
}

bool EsrpsdcProtocol::attacking(const NodeState& n, double now) const {
    return n.malicious && now >= sc_.attack.activation_s;
}

double EsrpsdcProtocol::control_range(Engine& eng) const {
    return max_range_m(sc_.radio.control_power_dbm, eng.radio());
}

double EsrpsdcProtocol::unicast_power(Engine& eng, double d) const {
    const auto& cfg = eng.radio();
    if (max_range_m(cfg.control_power_dbm, cfg) >= d * 1.001)
        return cfg.control_power_dbm;
    for (double p : cfg.tx_power_dbm)
        if (max_range_m(p, cfg) >= d * 1.001) return p;
    return cfg.max_power_dbm();
}

void EsrpsdcProtocol::violate(const std::string& message) {
    if (invariant_violation_.empty()) invariant_violation_ = message;
}

void EsrpsdcProtocol::adopt_records(NodeInfo& ni, const std::vector<SourceRecord>& recs) {
    for (const auto& r : recs) {
        bool dup = false;
        for (const auto& have : ni.outbox)
            if (have.uid == r.uid) { dup = true; break; }
        if (!dup) {
            ni.outbox.push_back(r);
            ni.payload_by_uid.emplace(r.uid, sc_.payload_max_bytes);
        }
    }
}

void EsrpsdcProtocol::mark_transmitted(Engine& eng, NodeId id,
                                       const std::vector<SourceRecord>& recs) {
    for (const auto& r : recs)
        if (r.origin == id) ledger_.record_transmitted(r.uid, eng.now());
}

int EsrpsdcProtocol::frame_payload(const NodeInfo& ni,
                                   const std::vector<SourceRecord>& recs) const {
    int bytes = 0;
    for (const auto& r : recs) {
        auto it = ni.payload_by_uid.find(r.uid);
        bytes = std::max(bytes, it != ni.payload_by_uid.end() ? it->second
                                                              : sc_.payload_max_bytes);
    }
    return std::max(bytes, sc_.payload_min_bytes);
}

const TdmaSchedule& EsrpsdcProtocol::schedule_of_cluster(int cluster) const {
    return schedules_.at(static_cast<std::size_t>(cluster));
}

NodeId EsrpsdcProtocol::cluster_head_of(NodeId id) const {
    const auto& ni = info_[id];
    if (ni.parent == kBroadcast) return kBroadcast;
    if (ni.depth == 1) return ni.parent;
    const auto& relay = info_[ni.parent];
    return relay.parent;
}

void EsrpsdcProtocol::start(Engine& eng) {
    info_.assign(eng.nodes().size(), NodeInfo{});
    sector_of_node_.assign(eng.nodes().size(), -1);

    std::vector<const NodeState*> regular;
    for (const auto& n : eng.nodes())
        if (n.role != Role::BaseStation) regular.push_back(&n);
    sector_members_ = partition_clusters(regular, sc_.n_clusters);
    for (std::size_t s = 0; s < sector_members_.size(); ++s)
        for (NodeId id : sector_members_[s]) {
            sector_of_node_[id] = static_cast<int>(s);
            info_[id].sector = static_cast<int>(s);
        }
    tables_.assign(sector_members_.size(), ClusterTable{});
    for (std::size_t s = 0; s < tables_.size(); ++s) {
        tables_[s].cluster_id = static_cast<int>(s);
        for (NodeId id : sector_members_[s]) {
            if (eng.node(id).awake) ++tables_[s].active_count;
            else ++tables_[s].sleep_count;
        }
    }
    schedules_.assign(sector_members_.size(), TdmaSchedule{});

    eng.schedule_phase(0.0, kPhInit);
    eng.schedule_timer(0.01, kBsId, kTmReqFlood, 0);
    for (int i = 1; i <= max_level_; ++i)
        eng.schedule_timer(0.3 + 0.1 * i, kBsId, kTmBeacon, i);
    eng.schedule_timer(0.3 + 0.1 * (max_level_ + 1), kBsId, kTmHello, 0);

    for (std::size_t i = 0; i < sources_.size(); ++i)
        eng.schedule_timer(sources_[i].at_s, sources_[i].origin, kTmSource,
                           static_cast<std::int64_t>(i));
    if (!true_malicious_.empty())
        eng.schedule_timer(sc_.attack.activation_s, kBsId, kTmActivate, 0);

    eng.schedule_round(kFirstRound, 1);
}

void EsrpsdcProtocol::on_round(Engine& eng, int round) {
    current_round_ = round;
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation) continue;
        if (n.role == Role::ClusterHead) n.rounds_since_ch = 0;
        else if (n.rounds_since_ch < kNeverServed) ++n.rounds_since_ch;
    }

    const double t = eng.now();
    const bool epoch_start = (round - 1) % sc_.esrpsdc.epoch_rounds == 0;
    if (epoch_start) {
        // slots wait for the fresh membership; finalize schedules them
        epoch_setup(eng, round);
        frame_start_s_ = t + 2.2;
        traffic_pending_ = true;
    } else {
        handle_rotation(eng, round);
        frame_start_s_ = t + 0.15;
        schedule_round_traffic(eng, round, frame_start_s_);
    }

    if (round % sc_.detect.window_rounds == 0 && !detection_in_progress_)
        run_detection(eng);

    const double next = t + sc_.round_period_s;
    if (next <= eng.end_time()) eng.schedule_round(next, round + 1);
}

// --- epoch setup -----------------------------------------------------------

void EsrpsdcProtocol::epoch_setup(Engine& eng, int round) {
    const double t = eng.now();
    eng.schedule_phase(t, kPhElection);
    // refresh the BS-rooted hop-count flood, then run the phases
    eng.schedule_timer(t + 0.01, kBsId, kTmReqFlood, 0);
    eng.schedule_timer(t + 0.50, kBsId, kTmElect, round);
    eng.schedule_timer(t + 0.80, kBsId, kTmAdvert, 0);
    eng.schedule_timer(t + 1.20, kBsId, kTmJoinEval, 0);
    eng.schedule_timer(t + 1.30, kBsId, kTmStateBcast, 0);
    eng.schedule_timer(t + 1.70, kBsId, kTmJoin2Eval, 0);
    eng.schedule_timer(t + 1.85, kBsId, kTmFinalize, 0);
}

void EsrpsdcProtocol::run_elections(Engine& eng, int round,
                                    const std::vector<int>& sectors) {
    for (int s : sectors) {
        std::vector<const NodeState*> members;
        NodeId coordinator = kBroadcast;
        for (NodeId id : sector_members_[s]) {
            const NodeState& n = eng.node(id);
            if (!n.alive() || !n.awake) continue;
            if (attacking(n, eng.now()) || blacklist_.count(id)) continue;
            members.push_back(&n);
            if (coordinator == kBroadcast) coordinator = id;
        }
        if (tables_[s].ch && eng.node(tables_[s].ch->id).alive())
            coordinator = tables_[s].ch->id;

        // Members report their residual energy to the coordinator.
        if (coordinator != kBroadcast)
            for (const auto* m : members) {
                if (m->id == coordinator) continue;
                const double d = distance(m->pos, eng.node(coordinator).pos);
                eng.charge_tx(m->id, kElectReportBytes * 8, d);
                eng.charge_rx(coordinator, kElectReportBytes * 8);
            }

        // Demote previous heads before ranking.
        for (const auto* m : members) {
            NodeState& n = eng.node(m->id);
            if (n.role == Role::ClusterHead || n.role == Role::NextClusterHead)
                n.role = Role::Member;
        }

        auto result = elect_heads(members, round, sc_.esrpsdc.threshold, bands_,
                                  sc_.bs_pos, [&eng] { return eng.rng().uniform(); });
        ClusterTable& table = tables_[s];
        table.active_count = static_cast<int>(members.size());
        table.sleep_count = 0;
        for (NodeId id : sector_members_[s])
            if (eng.node(id).alive() && !eng.node(id).awake) ++table.sleep_count;
        if (!result) {
            // Dissolved cluster: its nodes join neighbours through adverts.
            table.ch.reset();
            table.next_ch.reset();
            continue;
        }
        if (result->fallback) ++fallback_elections_;
        table.ch = result->ch;
        table.next_ch = result->next_ch;
        if (table.ch->energy_j < table.next_ch->energy_j)
            violate("cluster table energy ordering broken");
        eng.node(result->ch.id).role = Role::ClusterHead;
        eng.node(result->ch.id).rounds_since_ch = 0;
        eng.node(result->next_ch.id).role = Role::NextClusterHead;
        info_[result->ch.id].ch_elect_energy = result->ch.energy_j;
    }
}

void EsrpsdcProtocol::send_adverts(Engine& eng) {
    adverts_heard_.clear();
    for (const auto& table : tables_) {
        if (!table.ch) continue;
        const NodeState& ch = eng.node(table.ch->id);
        if (!ch.alive()) continue;
        Packet p;
        p.kind = PacketKind::ChAdvert;
        p.dst = kBroadcast;
        p.payload_bytes = kAdvertBytes;
        p.created_s = eng.now();
        p.level = ch.level;
        p.hops_to_bs = ch.level;
        p.cluster_id = table.cluster_id;
        eng.transmit_later(eng.jitter(), ch.id, p, sc_.radio.control_power_dbm);
    }
    // Sinkholes lure with claimed hop-count 1 and a link-quality bonus.
    for (auto& n : eng.nodes()) {
        if (!attacking(n, eng.now()) || !n.alive()) continue;
        if (!sc_.attack.false_advert) continue;
        Packet p;
        p.kind = PacketKind::ChAdvert;
        p.dst = kBroadcast;
        p.payload_bytes = kAdvertBytes;
        p.created_s = eng.now();
        p.level = 0;  // caters to any receiver
        p.hops_to_bs = 1;
        p.snr_bonus_db = sc_.attack.snr_bonus_db;
        p.cluster_id = -1;
        eng.transmit_later(eng.jitter(), n.id, p, sc_.radio.control_power_dbm);
    }
}

void EsrpsdcProtocol::evaluate_joins(Engine& eng) {
    eng.schedule_phase(eng.now(), kPhJoining);
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation || !n.alive() || !n.awake) continue;
        if (n.role == Role::ClusterHead || attacking(n, eng.now())) continue;
        if (info_[n.id].parent != kBroadcast) continue;  // already joined
        auto it = adverts_heard_.find(n.id);
        if (it == adverts_heard_.end() || it->second.empty()) continue;
        const AdvertSeen* best = nullptr;
        for (const auto& a : it->second) {
            if (blacklist_.count(a.from)) continue;
            if (!eng.node(a.from).alive()) continue;
            if (eng.node(a.from).malicious && lure_load_[a.from] >= sc_.attack.capacity)
                continue;  // the lure is full and stops answering confirms
            if (!best || a.score_db > best->score_db ||
                (a.score_db == best->score_db && a.from < best->from))
                best = &a;
        }
        if (!best) continue;
        if (eng.node(best->from).malicious) ++lure_load_[best->from];
        NodeInfo& ni = info_[n.id];
        ni.parent = best->from;
        ni.depth = 1;
        ni.cluster = best->cluster;
        ni.parent_rssi_dbm = best->rssi_dbm;
        ni.parent_power_dbm = best->tx_power_dbm;
        Packet confirm;
        confirm.kind = PacketKind::JoinConfirm;
        confirm.dst = best->from;
        confirm.payload_bytes = kJoinBytes;
        confirm.created_s = eng.now();
        eng.transmit(n.id, confirm,
                     unicast_power(eng, distance(n.pos, eng.node(best->from).pos)));
    }
}

void EsrpsdcProtocol::send_state_msgs(Engine& eng) {
    states_heard_.clear();
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation || !n.alive()) continue;
        const bool honest_one_hop =
            !attacking(n, eng.now()) && info_[n.id].depth == 1 &&
            info_[n.id].parent != kBroadcast;
        const bool faking = attacking(n, eng.now()) && sc_.attack.false_advert;
        if (!honest_one_hop && !faking) continue;
        Packet p;
        p.kind = PacketKind::StateMsg;
        p.dst = kBroadcast;
        p.payload_bytes = kStateBytes;
        p.created_s = eng.now();
        p.subject = honest_one_hop ? info_[n.id].parent : n.id;
        p.cluster_id = honest_one_hop ? info_[n.id].cluster : -1;
        p.snr_bonus_db = faking ? sc_.attack.snr_bonus_db : 0.0;
        eng.transmit_later(eng.jitter(), n.id, p, sc_.radio.control_power_dbm);
    }
}

void EsrpsdcProtocol::evaluate_two_hop_joins(Engine& eng) {
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation || !n.alive() || !n.awake) continue;
        if (n.role == Role::ClusterHead || attacking(n, eng.now())) continue;
        NodeInfo& ni = info_[n.id];
        if (ni.parent != kBroadcast) continue;
        auto it = states_heard_.find(n.id);
        if (it == states_heard_.end() || it->second.empty()) continue;
        const AdvertSeen* best = nullptr;
        for (const auto& a : it->second) {
            if (blacklist_.count(a.from) || !eng.node(a.from).alive()) continue;
            if (eng.node(a.from).malicious && lure_load_[a.from] >= sc_.attack.capacity)
                continue;
            if (!best || a.score_db > best->score_db ||
                (a.score_db == best->score_db && a.from < best->from))
                best = &a;
        }
        if (!best) continue;
        if (eng.node(best->from).malicious) ++lure_load_[best->from];
        ni.parent = best->from;
        ni.depth = 2;
        ni.cluster = best->cluster;
        ni.parent_rssi_dbm = best->rssi_dbm;
        ni.parent_power_dbm = best->tx_power_dbm;
        NodeState& relay = eng.node(best->from);
        if (!attacking(relay, eng.now()) && relay.role != Role::ClusterHead &&
            relay.role != Role::Malicious)
            relay.role = Role::OneHopRelay;
        Packet confirm;
        confirm.kind = PacketKind::JoinConfirm;
        confirm.dst = best->from;
        confirm.payload_bytes = kJoinBytes;
        confirm.created_s = eng.now();
        confirm.subject = n.id;
        eng.transmit(n.id, confirm,
                     unicast_power(eng, distance(n.pos, relay.pos)));
    }
}

void EsrpsdcProtocol::finalize_membership(Engine& eng) {
    // Assign member ids per cluster, resolve suffix collisions through the
    // CH, build TDMA schedules, count orphans.
    const double slot_len =
        eng.serialization_delay(sc_.payload_max_bytes * 8) + eng.processing_delay() +
        kGuardS;

    std::vector<std::vector<std::pair<NodeId, int>>> members(tables_.size());
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation || !n.alive()) continue;
        NodeInfo& ni = info_[n.id];
        if (attacking(n, eng.now())) continue;
        if (ni.parent == kBroadcast || ni.cluster < 0) continue;
        members[ni.cluster].emplace_back(n.id, ni.depth);
    }

    intra_frame_len_s_ = 0.0;
    for (std::size_t c = 0; c < tables_.size(); ++c) {
        auto& table = tables_[c];
        if (!table.ch) { schedules_[c] = TdmaSchedule{}; continue; }
        const NodeId ch_id = table.ch->id;
        NodeState& ch = eng.node(ch_id);

        // member ids: CH carries the bare cluster id, 1-hop members append an
        // m-byte suffix, 2-hop members append to their relay's id
        info_[ch_id].mid.bytes = {static_cast<std::uint8_t>(table.cluster_id & 0xff)};
        info_[ch_id].mid.depth = 0;
        std::set<std::vector<std::uint8_t>> used{info_[ch_id].mid.bytes};

        std::sort(members[c].begin(), members[c].end(),
                  [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second < b.second;
                      return a.first < b.first;
                  });
        for (const auto& [id, depth] : members[c]) {
            NodeInfo& ni = info_[id];
            const std::vector<std::uint8_t>& base =
                depth == 1 ? info_[ch_id].mid.bytes : info_[ni.parent].mid.bytes;
            std::vector<std::uint8_t> mid = base;
            for (int b = 0; b < sc_.esrpsdc.m_bytes; ++b)
                mid.push_back(static_cast<std::uint8_t>(eng.rng().byte()));
            int corrections = 0;
            while (used.count(mid)) {
                // conflict: the CH hands out a fresh id
                mid.resize(base.size());
                for (int b = 0; b < sc_.esrpsdc.m_bytes; ++b)
                    mid.push_back(static_cast<std::uint8_t>(eng.rng().byte()));
                if (++corrections > 4096)
                    throw std::runtime_error("esrpsdc: id space exhausted");
            }
            if (corrections > 0) {
                eng.charge_tx(ch_id, kJoinBytes * 8, distance(ch.pos, eng.node(id).pos));
                eng.charge_rx(id, kJoinBytes * 8);
            }
            used.insert(mid);
            ni.mid.bytes = mid;
            ni.mid.depth = depth;
            eng.node(id).member_id = mid;
        }
        ch.member_id = info_[ch_id].mid.bytes;

        schedules_[c] = build_tdma(members[c], slot_len);
        intra_frame_len_s_ = std::max(intra_frame_len_s_, schedules_[c].round_len_s);
        if (!schedules_[c].slots.empty()) {
            Packet p;
            p.kind = PacketKind::TdmaSchedule;
            p.dst = kBroadcast;
            p.payload_bytes = 8 + 2 * static_cast<int>(schedules_[c].slots.size());
            p.created_s = eng.now();
            p.cluster_id = table.cluster_id;
            for (const auto& [id, idx] : schedules_[c].slots) p.id_list.push_back(id);
            eng.transmit(ch_id, p, sc_.radio.control_power_dbm);
        }
    }

    // Sinkholes schedule their victims too, or nobody would transmit to them.
    fake_schedules_.clear();
    std::map<NodeId, std::vector<std::pair<NodeId, int>>> fake_members;
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation || !n.alive()) continue;
        NodeInfo& ni = info_[n.id];
        if (attacking(n, eng.now()) || ni.parent == kBroadcast) continue;
        if (ni.cluster >= 0) continue;  // honest cluster
        // parent chain ends at a sinkhole posing as CH or relay
        NodeId fake_root = ni.depth == 1 ? ni.parent : info_[ni.parent].parent;
        if (fake_root == kBroadcast) fake_root = ni.parent;
        fake_members[fake_root].emplace_back(n.id, ni.depth);
    }
    for (auto& [fake_ch, mlist] : fake_members) {
        if (!eng.node(fake_ch).alive()) continue;
        fake_schedules_[fake_ch] = build_tdma(mlist, slot_len);
        intra_frame_len_s_ =
            std::max(intra_frame_len_s_, fake_schedules_[fake_ch].round_len_s);
        Packet p;
        p.kind = PacketKind::TdmaSchedule;
        p.dst = kBroadcast;
        p.payload_bytes = 8 + 2 * static_cast<int>(mlist.size());
        p.created_s = eng.now();
        p.cluster_id = -1;
        eng.transmit(fake_ch, p, sc_.radio.control_power_dbm);
    }

    orphans_ = 0;
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation || !n.alive()) continue;
        if (attacking(n, eng.now()) || n.role == Role::ClusterHead) continue;
        if (info_[n.id].parent == kBroadcast) ++orphans_;
    }

    check_membership_invariants(eng);
    eng.schedule_phase(eng.now(), kPhDataRounds);
    if (traffic_pending_) {
        traffic_pending_ = false;
        schedule_round_traffic(eng, current_round_, frame_start_s_);
    }
}

void EsrpsdcProtocol::check_membership_invariants(Engine& eng) {
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation || !n.alive()) continue;
        const NodeInfo& ni = info_[n.id];
        if (ni.parent == kBroadcast) continue;
        if (ni.depth < 1 || ni.depth > 2) violate("membership depth out of range");
        if (ni.depth == 2) {
            const NodeInfo& relay = info_[ni.parent];
            if (relay.parent == kBroadcast && !eng.node(ni.parent).malicious)
                violate("two-hop member " + std::to_string(n.id) +
                        " attached to unjoined relay " + std::to_string(ni.parent));
            if (relay.depth > 1 && !eng.node(ni.parent).malicious)
                violate("membership forest deeper than two hops at node " +
                        std::to_string(n.id));
        }
    }
    for (std::size_t c = 0; c < tables_.size(); ++c) {
        const auto& table = tables_[c];
        if (table.ch && table.next_ch) {
            if (table.ch->id == table.next_ch->id) violate("ch == next_ch");
            if (table.ch->energy_j < table.next_ch->energy_j)
                violate("cluster table energy ordering broken");
        }
        std::set<NodeId> seen;
        for (const auto& [id, idx] : schedules_[c].slots) {
            if (!seen.insert(id).second) violate("node scheduled twice");
            if (!eng.node(id).awake) violate("sleeping node scheduled");
        }
    }
}

// --- data rounds -----------------------------------------------------------

void EsrpsdcProtocol::schedule_round_traffic(Engine& eng, int round,
                                             double frame_start) {
    // Empty slots are radio silence; only members carrying data (or relaying
    // a child that does) get a timer.
    std::vector<char> child_pending(eng.nodes().size(), 0);
    for (const auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation) continue;
        const NodeInfo& ci = info_[n.id];
        if (ci.depth == 2 && ci.parent != kBroadcast && !ci.outbox.empty())
            child_pending[ci.parent] = 1;
    }
    auto want_slot = [&](NodeId id) {
        return !info_[id].outbox.empty() || child_pending[id] != 0;
    };

    auto schedule_cluster = [&](const TdmaSchedule& sched) {
        if (sched.slots.empty()) return;
        const double slot_len = sched.round_len_s / sched.slots.size();
        for (const auto& [id, idx] : sched.slots) {
            if (!eng.node(id).alive()) continue;
            if (!want_slot(id)) continue;
            eng.schedule_timer(frame_start + idx * slot_len, id, kTmSlot, round);
        }
    };
    for (const auto& sched : schedules_) schedule_cluster(sched);
    for (const auto& [fake, sched] : fake_schedules_) schedule_cluster(sched);

    // Inter-cluster cascade: the outermost ring dispatches first so inner
    // heads can fuse upstream aggregates within the same round.
    for (const auto& table : tables_) {
        if (!table.ch) continue;
        const NodeState& ch = eng.node(table.ch->id);
        if (!ch.alive()) continue;
        const double phase = intra_frame_len_s_ +
                             (max_level_ - ch.level) * sc_.esrpsdc.forward_hold_s;
        eng.schedule_timer(frame_start + phase, table.ch->id, kTmCascade, round);
    }
}

void EsrpsdcProtocol::member_slot(Engine& eng, NodeId id) {
    NodeState& n = eng.node(id);
    if (!n.alive()) return;
    NodeInfo& ni = info_[id];
    if (ni.parent == kBroadcast) return;
    if (ni.outbox.empty() && ni.round_buffer.empty()) return;
    const NodeState& parent = eng.node(ni.parent);
    if (!parent.alive()) return;  // hold until rotation or next epoch

    // merge buffered child records (relay duty) with the node's own
    std::vector<SourceRecord> recs = ni.outbox;
    for (const auto& r : ni.round_buffer) {
        bool dup = false;
        for (const auto& e : recs)
            if (e.uid == r.uid) { dup = true; break; }
        if (!dup) recs.push_back(r);
    }
    ni.round_buffer.clear();

    Packet p;
    p.kind = PacketKind::Data;
    p.dst = ni.parent;
    p.payload_bytes = frame_payload(ni, recs);
    p.created_s = eng.now();
    p.sources = recs;

    double power;
    if (ni.parent_power_dbm != 0.0 || ni.parent_rssi_dbm != 0.0) {
        auto lvl = min_tx_power_for(ni.parent_rssi_dbm, ni.parent_power_dbm, eng.radio());
        power = lvl ? *lvl : eng.radio().max_power_dbm();
    } else {
        power = unicast_power(eng, distance(n.pos, parent.pos));
    }
    if (eng.transmit(id, p, power)) {
        mark_transmitted(eng, id, recs);
        ni.outbox.clear();
    }
}

std::optional<std::pair<NodeId, double>> EsrpsdcProtocol::select_next_hop(Engine& eng,
                                                                          NodeId ch_id) {
    const NodeState& me = eng.node(ch_id);
    struct Candidate {
        NodeId id;
        int hops;
        double snr;
        int level;
    };
    std::vector<Candidate> primary, lower;
    for (const auto& table : tables_) {
        if (!table.ch || table.ch->id == ch_id) continue;
        const NodeState& c = eng.node(table.ch->id);
        if (!c.alive() || blacklist_.count(c.id)) continue;
        if (c.level >= me.level) continue;
        const LinkBudget lb = snr(me, c, eng.radio().max_power_dbm(), eng.radio());
        if (!lb.receivable) continue;
        // route cost in head-graph hops: one hop per ring down to the sink
        Candidate cand{c.id, c.level, lb.snr_db, c.level};
        if (c.level == me.level - 1) primary.push_back(cand);
        else lower.push_back(cand);
    }
    // Sinkholes advertise themselves as next-level heads one hop from the BS.
    auto it = adverts_heard_.find(ch_id);
    if (it != adverts_heard_.end())
        for (const auto& a : it->second) {
            if (a.cluster >= 0) continue;  // honest advert
            if (blacklist_.count(a.from) || !eng.node(a.from).alive()) continue;
            primary.push_back(Candidate{a.from, 1, a.score_db, me.level - 1});
        }

    auto pick = [](std::vector<Candidate>& v) -> std::optional<Candidate> {
        if (v.empty()) return std::nullopt;
        std::sort(v.begin(), v.end(), [](const Candidate& a, const Candidate& b) {
            if (a.hops != b.hops) return a.hops < b.hops;
            if (a.snr != b.snr) return a.snr > b.snr;
            return a.id < b.id;
        });
        return v.front();
    };

    if (auto c = pick(primary)) {
        cascade_level_trace_.push_back(c->level);
        if (c->level >= me.level) violate("cascade hop failed to descend a level");
        return std::make_pair(c->id, distance(me.pos, eng.node(c->id).pos));
    }
    if (auto c = pick(lower)) {
        cascade_level_trace_.push_back(c->level);
        if (c->level >= me.level) violate("cascade hop failed to descend a level");
        return std::make_pair(c->id, distance(me.pos, eng.node(c->id).pos));
    }
    return std::nullopt;  // caller falls back to a direct BS hop
}

void EsrpsdcProtocol::cascade_dispatch(Engine& eng, NodeId ch_id) {
    NodeState& ch = eng.node(ch_id);
    NodeInfo& ni = info_[ch_id];
    if (!ch.alive() || ch.role != Role::ClusterHead) return;

    std::vector<SourceRecord> recs;
    std::set<std::uint64_t> seen;
    auto takeall = [&](std::vector<SourceRecord>& v) {
        for (const auto& r : v)
            if (seen.insert(r.uid).second) recs.push_back(r);
        v.clear();
    };
    takeall(ni.round_buffer);
    takeall(ni.held);
    takeall(ni.outbox);
    ni.cascade_done_round = current_round_;
    if (recs.empty()) return;

    Packet p;
    p.kind = PacketKind::Aggregate;
    p.dst = kBsId;
    p.payload_bytes = sc_.payload_max_bytes;  // one compressed frame
    p.created_s = eng.now();
    p.sources = recs;

    if (ch.level <= 1) {
        const double d = distance(ch.pos, sc_.bs_pos);
        ni.last_next_hop = kBsId;
        cascade_level_trace_.push_back(0);
        if (eng.transmit(ch_id, p, unicast_power(eng, d)))
            mark_transmitted(eng, ch_id, recs);
        return;
    }
    auto hop = select_next_hop(eng, ch_id);
    if (!hop) {
        // stranded head: hand the frame down the cheap BS flood tree
        ++fallback_route_hops_;
        const NodeId fp = ni.flood_parent;
        if (fp == kBroadcast) {
            p.dst = kBsId;
            ni.last_next_hop = kBsId;
            if (eng.transmit(ch_id, p, eng.radio().max_power_dbm()))
                mark_transmitted(eng, ch_id, recs);
            return;
        }
        p.dst = fp;
        p.level = kFloodRelayMark;
        ni.last_next_hop = fp;
        if (eng.transmit(ch_id, p,
                         unicast_power(eng, distance(ch.pos, eng.node(fp).pos))))
            mark_transmitted(eng, ch_id, recs);
        return;
    }
    p.dst = hop->first;
    ni.last_next_hop = hop->first;
    if (eng.transmit(ch_id, p, unicast_power(eng, hop->second)))
        mark_transmitted(eng, ch_id, recs);
}

void EsrpsdcProtocol::handle_rotation(Engine& eng, int round) {
    for (std::size_t s = 0; s < tables_.size(); ++s) {
        ClusterTable& table = tables_[s];
        if (!table.ch) continue;
        NodeState& ch = eng.node(table.ch->id);
        const bool invalid = !ch.alive() || attacking(ch, eng.now()) ||
                             blacklist_.count(ch.id) > 0;
        const bool depleted =
            !invalid && ch.energy_j <
                            sc_.esrpsdc.abdicate_fraction * info_[ch.id].ch_elect_energy;
        if (!invalid && !depleted) continue;
        if (depleted) {
            Packet p;
            p.kind = PacketKind::Abdicate;
            p.dst = kBroadcast;
            p.payload_bytes = kAbdicateBytes;
            p.created_s = eng.now();
            p.cluster_id = table.cluster_id;
            p.subject = table.next_ch ? table.next_ch->id : kBroadcast;
            eng.transmit(ch.id, p, sc_.radio.control_power_dbm);
        }
        promote_or_reelect(eng, static_cast<int>(s), round);
    }
}

void EsrpsdcProtocol::promote_or_reelect(Engine& eng, int sector, int round) {
    ClusterTable& table = tables_[sector];
    const NodeId old_ch = table.ch ? table.ch->id : kBroadcast;
    if (old_ch != kBroadcast) {
        NodeState& prev = eng.node(old_ch);
        if (prev.role == Role::ClusterHead) prev.role = Role::Member;
    }

    NodeId new_ch = kBroadcast;
    if (table.next_ch) {
        NodeState& cand = eng.node(table.next_ch->id);
        if (cand.alive() && !attacking(cand, eng.now()) && !blacklist_.count(cand.id))
            new_ch = cand.id;
    }
    if (new_ch != kBroadcast) {
        NodeState& n = eng.node(new_ch);
        n.role = Role::ClusterHead;
        n.rounds_since_ch = 0;
        table.ch = ChEntry{new_ch, n.energy_j};
        table.next_ch.reset();
        info_[new_ch].ch_elect_energy = n.energy_j;
    } else {
        // both heads gone: a full re-election for this cluster
        std::vector<const NodeState*> members;
        for (NodeId id : sector_members_[sector]) {
            const NodeState& n = eng.node(id);
            if (n.alive() && n.awake && !attacking(n, eng.now()) &&
                !blacklist_.count(id))
                members.push_back(&n);
        }
        auto result = elect_heads(members, round, sc_.esrpsdc.threshold, bands_,
                                  sc_.bs_pos, [&eng] { return eng.rng().uniform(); });
        if (!result) {
            table.ch.reset();
            table.next_ch.reset();
            for (auto& n : eng.nodes()) {
                if (n.role == Role::BaseStation) continue;
                NodeInfo& ni = info_[n.id];
                if (ni.parent == old_ch) {
                    ni.parent = kBroadcast;
                    ni.depth = 0;
                    ni.cluster = -1;
                }
            }
            return;
        }
        if (result->fallback) ++fallback_elections_;
        new_ch = result->ch.id;
        table.ch = result->ch;
        table.next_ch = result->next_ch;
        eng.node(new_ch).role = Role::ClusterHead;
        eng.node(new_ch).rounds_since_ch = 0;
        eng.node(result->next_ch.id).role = Role::NextClusterHead;
        info_[new_ch].ch_elect_energy = result->ch.energy_j;
    }

    // members of the old head follow the successor; anyone who was relaying
    // through the promoted node now talks to the head directly
    if (old_ch != kBroadcast && new_ch != kBroadcast) {
        for (auto& n : eng.nodes()) {
            if (n.role == Role::BaseStation) continue;
            NodeInfo& ni = info_[n.id];
            if (ni.parent == old_ch && n.id != new_ch) {
                ni.parent = new_ch;
                ni.parent_rssi_dbm = 0.0;
                ni.parent_power_dbm = 0.0;
            } else if (ni.parent == new_ch && ni.depth == 2) {
                ni.depth = 1;
            }
        }
        NodeInfo& promoted = info_[new_ch];
        promoted.parent = kBroadcast;
        promoted.depth = 0;
    }
}

// --- deliveries ------------------------------------------------------------

void EsrpsdcProtocol::on_deliver(Engine& eng, NodeId to, const Packet& pkt) {
    NodeState& self = eng.node(to);
    NodeInfo& ni = info_[to];
    const double now = eng.now();

    switch (pkt.kind) {
        case PacketKind::Req: {
            if (to == kBsId) return;
            const int seq = pkt.level;
            if (ni.flood_seq_seen == seq) return;  // duplicate copy, sleep it off
            ni.flood_seq_seen = seq;
            eng.charge_rx(to, pkt.bits());
            ni.hop_to_bs = pkt.hops_to_bs + 1;
            ni.flood_parent = pkt.src;
            if (self.alive())
                eng.schedule_timer(now + eng.jitter(), to, kTmRebroadcast, seq);
            return;
        }
        case PacketKind::LevelBeacon: {
            if (to == kBsId || self.level != 0) return;
            eng.charge_rx(to, pkt.bits());
            self.level = pkt.level;
            return;
        }
        case PacketKind::Hello:
            if (to != kBsId && !ni.hello_seen) {
                ni.hello_seen = true;
                eng.charge_rx(to, pkt.bits());
            }
            return;
        case PacketKind::ChAdvert: {
            if (to == kBsId || attacking(self, now)) return;
            const bool wants = info_[to].parent == kBroadcast ||
                               self.role == Role::ClusterHead;
            if (!wants) return;
            eng.charge_rx(to, pkt.bits());
            const double d = distance(eng.node(pkt.src).pos, self.pos);
            const LinkBudget lb = link_budget(pkt.tx_power_dbm, d, eng.radio());
            adverts_heard_[to].push_back(AdvertSeen{pkt.src,
                                                    lb.snr_db + pkt.snr_bonus_db,
                                                    lb.rx_power_dbm, pkt.tx_power_dbm,
                                                    pkt.cluster_id});
            return;
        }
        case PacketKind::StateMsg: {
            if (to == kBsId || attacking(self, now)) return;
            if (info_[to].parent != kBroadcast || self.role == Role::ClusterHead)
                return;
            eng.charge_rx(to, pkt.bits());
            const double d = distance(eng.node(pkt.src).pos, self.pos);
            const LinkBudget lb = link_budget(pkt.tx_power_dbm, d, eng.radio());
            states_heard_[to].push_back(AdvertSeen{pkt.src,
                                                   lb.snr_db + pkt.snr_bonus_db,
                                                   lb.rx_power_dbm, pkt.tx_power_dbm,
                                                   pkt.cluster_id});
            return;
        }
        case PacketKind::JoinConfirm:
            // membership bookkeeping is mirrored centrally; the frame exists
            // for its energy and trace footprint
            return;
        case PacketKind::Abdicate: {
            if (to == kBsId) return;
            if (ni.cluster == pkt.cluster_id) eng.charge_rx(to, pkt.bits());
            return;
        }
        case PacketKind::TdmaSchedule: {
            if (to == kBsId) return;
            if (ni.parent == pkt.src || ni.cluster == pkt.cluster_id)
                eng.charge_rx(to, pkt.bits());
            return;
        }
        case PacketKind::Data:
        case PacketKind::Aggregate: {
            if (to == kBsId) {
                ledger_.record_bs_delivery(pkt.sources, now);
                return;
            }
            if (attacking(self, now)) {
                const CaptureAction act = capture_action(sc_.attack, eng.rng());
                if (act == CaptureAction::Drop) return;
                auto target = divert_target(eng.nodes(), to, control_range(eng), eng.rng());
                if (!target) return;
                Packet p = pkt;
                p.dst = *target;
                eng.transmit(to, p, sc_.radio.control_power_dbm);
                return;
            }
            if (self.role == Role::ClusterHead) {
                eng.debit_aggregation(to, pkt.bits());
                if (!self.alive()) return;
                if (ni.cascade_done_round == current_round_)
                    adopt_into(ni.held, pkt.sources);
                else
                    adopt_into(ni.round_buffer, pkt.sources);
                return;
            }
            // relay duty or a diverted stray: carry the records onward
            if (pkt.kind == PacketKind::Data && ni.depth == 1 &&
                info_[pkt.src].parent == to) {
                adopt_into(ni.round_buffer, pkt.sources);
                return;
            }
            if (pkt.kind == PacketKind::Aggregate && pkt.level == kFloodRelayMark) {
                // pass it straight down the flood tree
                Packet p = pkt;
                if (ni.flood_parent == kBroadcast) {
                    p.dst = kBsId;
                    eng.transmit(to, p, eng.radio().max_power_dbm());
                } else {
                    p.dst = ni.flood_parent;
                    const double d = distance(self.pos, eng.node(ni.flood_parent).pos);
                    eng.transmit(to, p, unicast_power(eng, d));
                }
                return;
            }
            adopt_records(ni, pkt.sources);
            return;
        }
        case PacketKind::DetectRequest: {
            if (to == kBsId) return;
            const int seq = pkt.level;
            if (pkt.hops_to_bs < 0) {
                // blacklist flood
                if (ni.blacklist_seq_seen == seq) { ++ni.flood_copies; return; }
                ni.blacklist_seq_seen = seq;
                ni.flood_copies = 1;
                eng.charge_rx(to, pkt.bits());
                // even lures relay sink control floods; selective silence on
                // broadcasts would give them away
                eng.schedule_timer(now + eng.rng().uniform(0.0, 0.12), to,
                                   kTmRebroadcast, -seq - 1000);
                return;
            }
            if (ni.detect_seq_seen == seq) { ++ni.flood_copies; return; }
            ni.detect_seq_seen = seq;
            ni.flood_copies = 1;
            eng.charge_rx(to, pkt.bits());
            ni.detect_parent = pkt.src;
            ni.detect_hops = pkt.hops_to_bs + 1;
            eng.schedule_timer(now + eng.rng().uniform(0.0, 0.12), to, kTmRebroadcast,
                               seq + 10000);
            if (attacking(self, now)) return;  // relays the flood, never answers
            const bool listed =
                pkt.cluster_id == 1 ||
                std::find(pkt.id_list.begin(), pkt.id_list.end(), to) !=
                    pkt.id_list.end();
            if (listed)
                eng.schedule_timer(now + 0.3 + eng.jitter(), to, kTmRespond, seq);
            return;
        }
        case PacketKind::DetectResponse: {
            if (to == kBsId) {
                if (!pkt.id_list.empty())
                    responses_.push_back(FlowResponse{pkt.id_list.front(), pkt.subject,
                                                      pkt.hops_to_bs});
                return;
            }
            // responses ride the reverse flood path; a lure on that path is
            // logged as a potential evasion point but relays like any node,
            // silently eating sink-bound control would expose it
            if (attacking(self, now)) ++evasions_;
            NodeId up = ni.detect_parent;
            if (up == kBroadcast) up = kBsId;
            Packet p = pkt;
            p.dst = up;
            const double d = distance(self.pos, eng.node(up).pos);
            eng.transmit(to, p, unicast_power(eng, d));
            return;
        }
    }
}

void EsrpsdcProtocol::adopt_into(std::vector<SourceRecord>& buf,
                                 const std::vector<SourceRecord>& recs) {
    for (const auto& r : recs) {
        bool dup = false;
        for (const auto& e : buf)
            if (e.uid == r.uid) { dup = true; break; }
        if (!dup) buf.push_back(r);
    }
}

// --- timers ----------------------------------------------------------------

void EsrpsdcProtocol::on_timer(Engine& eng, NodeId owner, int tag, std::int64_t arg) {
    switch (tag) {
        case kTmReqFlood: {
            ++flood_seq_;
            Packet p;
            p.kind = PacketKind::Req;
            p.dst = kBroadcast;
            p.payload_bytes = kReqBytes;
            p.created_s = eng.now();
            p.level = flood_seq_;
            p.hops_to_bs = 0;
            eng.transmit(kBsId, p, sc_.radio.control_power_dbm);
            return;
        }
        case kTmBeacon: {
            Packet p;
            p.kind = PacketKind::LevelBeacon;
            p.dst = kBroadcast;
            p.payload_bytes = kBeaconBytes;
            p.created_s = eng.now();
            p.level = static_cast<int>(arg);
            eng.transmit(kBsId, p, sc_.radio.tx_power_dbm[arg - 1]);
            return;
        }
        case kTmHello: {
            Packet p;
            p.kind = PacketKind::Hello;
            p.dst = kBroadcast;
            p.payload_bytes = 8 + 8 * max_level_;
            p.created_s = eng.now();
            p.bands = bands_;
            eng.transmit(kBsId, p, eng.radio().max_power_dbm());
            return;
        }
        case kTmElect: {
            // new epoch: previous memberships dissolve before re-election
            lure_load_.clear();
            for (auto& n : eng.nodes()) {
                if (n.role == Role::BaseStation) continue;
                NodeInfo& ni = info_[n.id];
                ni.parent = kBroadcast;
                ni.depth = 0;
                ni.cluster = -1;
                ni.parent_rssi_dbm = 0.0;
                ni.parent_power_dbm = 0.0;
                if (n.role == Role::OneHopRelay || n.role == Role::TwoHopMember)
                    n.role = Role::Member;
            }
            std::vector<int> sectors(tables_.size());
            for (std::size_t i = 0; i < sectors.size(); ++i)
                sectors[i] = static_cast<int>(i);
            run_elections(eng, static_cast<int>(arg), sectors);
            return;
        }
        case kTmAdvert: send_adverts(eng); return;
        case kTmJoinEval: evaluate_joins(eng); return;
        case kTmStateBcast: send_state_msgs(eng); return;
        case kTmJoin2Eval: evaluate_two_hop_joins(eng); return;
        case kTmFinalize: finalize_membership(eng); return;
        case kTmSlot: member_slot(eng, owner); return;
        case kTmCascade: cascade_dispatch(eng, owner); return;
        case kTmSource: {
            const SourcePlanEntry& plan = sources_[static_cast<std::size_t>(arg)];
            ledger_.record_source_packet(plan.uid, plan.origin, eng.now());
            NodeState& n = eng.node(plan.origin);
            if (!n.alive()) return;
            NodeInfo& ni = info_[plan.origin];
            ni.outbox.push_back(SourceRecord{plan.uid, plan.origin, eng.now()});
            ni.payload_by_uid[plan.uid] = plan.payload_bytes;
            // a head sources straight into its aggregate stream
            return;
        }
        case kTmActivate:
            for (auto& n : eng.nodes())
                if (n.malicious && n.role != Role::BaseStation) n.role = Role::Malicious;
            return;
        case kTmRebroadcast: {
            NodeState& n = eng.node(owner);
            if (!n.alive()) return;
            NodeInfo& ni = info_[owner];
            Packet p;
            p.dst = kBroadcast;
            p.created_s = eng.now();
            if (arg >= 10000) {  // detect flood relay
                if (ni.flood_copies >= 3) return;  // wave already saturated here
                p.kind = PacketKind::DetectRequest;
                p.level = static_cast<int>(arg - 10000);
                p.hops_to_bs = ni.detect_hops;
                p.payload_bytes = current_wave_bytes_;
                p.cluster_id = current_wave_everyone_ ? 1 : 0;
                if (!current_wave_everyone_) p.id_list = current_wave_ids_;
            } else if (arg <= -1000) {  // blacklist flood relay
                if (ni.flood_copies >= 3) return;
                p.kind = PacketKind::DetectRequest;
                p.level = static_cast<int>(-(arg + 1000));
                p.hops_to_bs = -1;
                p.payload_bytes = 8 + 2 * static_cast<int>(last_blacklist_delta_.size());
                p.id_list = last_blacklist_delta_;
            } else {  // hop-count flood relay
                p.kind = PacketKind::Req;
                p.level = static_cast<int>(arg);
                p.hops_to_bs = ni.hop_to_bs;
                p.payload_bytes = kReqBytes;
            }
            eng.transmit(owner, p, sc_.radio.control_power_dbm);
            return;
        }
        case kTmRespond: {
            NodeState& n = eng.node(owner);
            if (!n.alive() || attacking(n, eng.now())) return;
            NodeInfo& ni = info_[owner];
            NodeId next_hop = kBroadcast;
            if (n.role == Role::ClusterHead) {
                next_hop = ni.last_next_hop;
                if (next_hop == kBroadcast) {
                    auto hop = select_next_hop(eng, owner);
                    next_hop = hop ? hop->first : kBsId;
                }
            } else if (ni.parent != kBroadcast) {
                next_hop = ni.parent;
            }
            if (next_hop == kBroadcast || next_hop == owner) return;
            Packet p;
            p.kind = PacketKind::DetectResponse;
            p.payload_bytes = kResponseBytes;
            p.created_s = eng.now();
            p.id_list = {owner};
            p.subject = next_hop;
            p.hops_to_bs = std::max(1, ni.detect_hops);
            NodeId up = ni.detect_parent != kBroadcast ? ni.detect_parent : kBsId;
            p.dst = up;
            eng.transmit(owner, p, unicast_power(eng, distance(n.pos, eng.node(up).pos)));
            return;
        }
        case kTmDetectEval: evaluate_detection(eng); return;
        case kTmRejoinAdvert: send_adverts(eng); return;
        case kTmRejoinEval: evaluate_joins(eng); return;
        case kTmRejoinState: send_state_msgs(eng); return;
        case kTmRejoin2Eval: evaluate_two_hop_joins(eng); return;
        case kTmRejoinFinalize: finalize_membership(eng); return;
        default: return;
    }
}

// --- detection -------------------------------------------------------------

void EsrpsdcProtocol::run_detection(Engine& eng) {
    // judge only packets old enough for their delivery to have happened;
    // the cursor guarantees every transmission is evaluated exactly once
    const double now = eng.now();
    const double t1 = now - sc_.detect.grace_s;
    if (t1 <= last_detect_t_) return;
    auto ratios = ledger_.window_delivery_ratio(last_detect_t_, t1, now);
    last_detect_t_ = t1;
    for (NodeId b : blacklist_) ratios.erase(b);
    auto flagged = flag_affected(ratios, sc_.detect.flag_fraction);
    if (flagged.empty()) return;

    detection_in_progress_ = true;
    responses_.clear();
    queried_ = flagged;
    wave_count_ = 1;
    launch_wave(eng, flagged, false);
    eng.schedule_timer(now + 2.4, kBsId, kTmDetectEval, 0);
}

void EsrpsdcProtocol::launch_wave(Engine& eng, const std::set<NodeId>& wave_ids,
                                  bool everyone) {
    ++detect_seq_;
    current_wave_everyone_ = everyone;
    current_wave_ids_.assign(wave_ids.begin(), wave_ids.end());
    current_wave_bytes_ =
        everyone ? 8 : 8 + 2 * static_cast<int>(current_wave_ids_.size());
    Packet p;
    p.kind = PacketKind::DetectRequest;
    p.dst = kBroadcast;
    p.payload_bytes = current_wave_bytes_;
    p.created_s = eng.now();
    p.level = detect_seq_;
    p.hops_to_bs = 0;
    p.cluster_id = everyone ? 1 : 0;
    if (!everyone) p.id_list = current_wave_ids_;
    eng.transmit(kBsId, p, sc_.radio.control_power_dbm);
}

void EsrpsdcProtocol::evaluate_detection(Engine& eng) {
    std::set<NodeId> unqueried;
    for (const auto& r : responses_)
        if (r.next_hop != kBsId && !queried_.count(r.next_hop))
            unqueried.insert(r.next_hop);
    if (!unqueried.empty() && wave_count_ < 3 && !escalated_) {
        ++wave_count_;
        queried_.insert(unqueried.begin(), unqueried.end());
        launch_wave(eng, unqueried, false);
        eng.schedule_timer(eng.now() + 2.4, kBsId, kTmDetectEval, 0);
        return;
    }

    // a confirmed sinkhole escalates to a network-wide routing-pattern sweep:
    // every node reports its next hop, so every lure with captive members
    // shows up as a tree root at once
    if (!escalated_) {
        auto first_pass = locate_sinkhole(responses_, queried_, kBsId);
        bool fresh = false;
        for (NodeId s : first_pass)
            if (!ledger_.detection.suspects.count(s)) fresh = true;
        if (fresh) {
            escalated_ = true;
            for (const auto& n : eng.nodes())
                if (n.role != Role::BaseStation && n.alive()) queried_.insert(n.id);
            launch_wave(eng, {}, true);
            eng.schedule_timer(eng.now() + 2.4, kBsId, kTmDetectEval, 0);
            return;
        }
    }

    detection_in_progress_ = false;
    escalated_ = false;
    auto suspects = locate_sinkhole(responses_, queried_, kBsId);
    if (suspects.empty()) return;

    std::set<NodeId> fresh;
    for (NodeId s : suspects)
        if (!ledger_.detection.suspects.count(s)) fresh.insert(s);
    if (fresh.empty()) return;

    if (!ledger_.detection.triggered) {
        ledger_.detection.triggered = true;
        ledger_.detection.first_trigger_s = eng.now();
    }
    for (NodeId s : fresh) {
        ledger_.detection.suspects.insert(s);
        if (true_malicious_.count(s)) ++ledger_.detection.true_positives;
        else ++ledger_.detection.false_positives;
    }
    isolate(eng, fresh);
}

void EsrpsdcProtocol::isolate(Engine& eng, const std::set<NodeId>& suspects) {
    blacklist_.insert(suspects.begin(), suspects.end());
    last_blacklist_delta_.assign(suspects.begin(), suspects.end());
    ++rejoin_waves_;

    // flood only the freshly blacklisted ids
    ++blacklist_seq_;
    Packet p;
    p.kind = PacketKind::DetectRequest;
    p.dst = kBroadcast;
    p.payload_bytes = 8 + 2 * static_cast<int>(suspects.size());
    p.created_s = eng.now();
    p.level = blacklist_seq_;
    p.hops_to_bs = -1;
    p.id_list.assign(suspects.begin(), suspects.end());
    eng.transmit(kBsId, p, sc_.radio.control_power_dbm);

    // orphan everyone whose path runs through a blacklisted node; collect
    // first, clear second, so chain walks see intact parents
    std::vector<NodeId> tainted;
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation) continue;
        NodeInfo& ni = info_[n.id];
        if (ni.parent == kBroadcast) continue;
        const NodeId head = cluster_head_of(n.id);
        if (blacklist_.count(ni.parent) ||
            (head != kBroadcast && blacklist_.count(head)))
            tainted.push_back(n.id);
    }
    for (NodeId id : tainted) {
        NodeInfo& ni = info_[id];
        ni.parent = kBroadcast;
        ni.depth = 0;
        ni.cluster = -1;
        ni.parent_rssi_dbm = 0.0;
        ni.parent_power_dbm = 0.0;
    }
    // clusters led by a blacklisted head re-elect immediately
    for (std::size_t s = 0; s < tables_.size(); ++s)
        if (tables_[s].ch && blacklist_.count(tables_[s].ch->id))
            promote_or_reelect(eng, static_cast<int>(s), current_round_);

    const double t = eng.now();
    eng.schedule_timer(t + 0.3, kBsId, kTmRejoinAdvert, 0);
    eng.schedule_timer(t + 0.7, kBsId, kTmRejoinEval, 0);
    eng.schedule_timer(t + 0.85, kBsId, kTmRejoinState, 0);
    eng.schedule_timer(t + 1.2, kBsId, kTmRejoin2Eval, 0);
    eng.schedule_timer(t + 1.4, kBsId, kTmRejoinFinalize, 0);
}

}  // namespace wsnsim
