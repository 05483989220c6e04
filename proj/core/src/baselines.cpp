#include "wsnsim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wsnsim {

namespace {

enum : int {
    kTmElect = 1,
    kTmJoin,
    kTmSlot,
    kTmDispatch,
    kTmSource,
    kTmActivate,
    kTmChainSlot,
    kTmLeader,
    kTmDirect,
};

constexpr NodeId kBsId = 0;
constexpr int kAdvertBytes = 10;
constexpr int kJoinBytes = 8;
constexpr double kFirstRound = 2.0;
constexpr double kGuardS = 1e-3;

double pick_unicast_power(const RadioConfig& cfg, double d) {
    if (max_range_m(cfg.control_power_dbm, cfg) >= d * 1.001)
        return cfg.control_power_dbm;
    for (double p : cfg.tx_power_dbm)
        if (max_range_m(p, cfg) >= d * 1.001) return p;
    return cfg.max_power_dbm();
}

}  // namespace

double leach_threshold(double p, int round, int rounds_since_ch) {
    if (p <= 0.0 || p >= 1.0)
        throw std::invalid_argument("leach_threshold: p must lie in (0,1)");
    const int window = static_cast<int>(std::ceil(1.0 / p));
    if (rounds_since_ch < window) return 0.0;
    const double denom = 1.0 - p * static_cast<double>(round % window);
    if (denom <= 0.0) return 1.0;
    return std::min(1.0, p / denom);
}

Chain pegasis_build_chain(const std::vector<const NodeState*>& nodes, Position bs_pos) {
    if (nodes.size() < 2)
        throw std::invalid_argument("pegasis: a chain needs at least two nodes");

    const NodeState* start = nodes.front();
    for (const auto* n : nodes) {
        const double d = distance(n->pos, bs_pos);
        const double best = distance(start->pos, bs_pos);
        if (d > best || (d == best && n->id < start->id)) start = n;
    }

    Chain chain;
    std::vector<const NodeState*> remaining(nodes);
    remaining.erase(std::find(remaining.begin(), remaining.end(), start));
    const NodeState* cur = start;
    chain.order.push_back(cur->id);
    while (!remaining.empty()) {
        std::size_t best = 0;
        double best_d = distance(cur->pos, remaining[0]->pos);
        for (std::size_t i = 1; i < remaining.size(); ++i) {
            const double d = distance(cur->pos, remaining[i]->pos);
            if (d < best_d || (d == best_d && remaining[i]->id < remaining[best]->id)) {
                best = i;
                best_d = d;
            }
        }
        cur = remaining[best];
        chain.order.push_back(cur->id);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return chain;
}

// --- LEACH -------------------------------------------------------------------

LeachProtocol::LeachProtocol(const Scenario& sc, MetricsLedger& ledger,
                             std::vector<SourcePlanEntry> sources)
    : sc_(sc), ledger_(ledger), sources_(std::move(sources)) {}

bool LeachProtocol::attacking(const NodeState& n, double now) const {
    return n.malicious && now >= sc_.attack.activation_s;
}

void LeachProtocol::start(Engine& eng) {
    info_.assign(eng.nodes().size(), NodeInfo{});
    for (std::size_t i = 0; i < sources_.size(); ++i)
        eng.schedule_timer(sources_[i].at_s, sources_[i].origin, kTmSource,
                           static_cast<std::int64_t>(i));
    bool any_malicious = false;
    for (const auto& n : eng.nodes()) any_malicious |= n.malicious;
    if (any_malicious)
        eng.schedule_timer(sc_.attack.activation_s, kBsId, kTmActivate, 0);
    eng.schedule_round(kFirstRound, 1);
}

void LeachProtocol::on_round(Engine& eng, int round) {
    current_round_ = round;
    round_start_s_ = eng.now();
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation) continue;
        if (n.role == Role::ClusterHead) n.rounds_since_ch = 0;
        else if (n.rounds_since_ch < kNeverServed) ++n.rounds_since_ch;
    }
    elect(eng, round);
    eng.schedule_timer(round_start_s_ + 0.3, kBsId, kTmJoin, 0);

    const double next = round_start_s_ + sc_.round_period_s;
    if (next <= eng.end_time()) eng.schedule_round(next, round + 1);
}

void LeachProtocol::elect(Engine& eng, int round) {
    heads_.clear();
    adverts_heard_.clear();
    lure_load_.clear();
    const double now = eng.now();
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation) continue;
        NodeInfo& ni = info_[n.id];
        ni.head = kBroadcast;
        ni.collected.clear();
        if (n.role == Role::ClusterHead || n.role == Role::NextClusterHead)
            n.role = Role::Member;
        if (!n.alive() || !n.awake || attacking(n, now)) continue;
        const double u = eng.rng().uniform();
        if (u < leach_threshold(sc_.leach_p, round, n.rounds_since_ch)) {
            n.role = Role::ClusterHead;
            n.rounds_since_ch = 0;
            heads_.push_back(n.id);
        }
    }

    // adverts (honest heads and lures alike)
    for (NodeId h : heads_) {
        Packet p;
        p.kind = PacketKind::ChAdvert;
        p.dst = kBroadcast;
        p.payload_bytes = kAdvertBytes;
        p.created_s = now;
        eng.transmit_later(eng.jitter(), h, p, sc_.radio.control_power_dbm);
    }
    for (auto& n : eng.nodes()) {
        if (!n.alive() || !attacking(n, now) || !sc_.attack.false_advert) continue;
        Packet p;
        p.kind = PacketKind::ChAdvert;
        p.dst = kBroadcast;
        p.payload_bytes = kAdvertBytes;
        p.created_s = now;
        p.hops_to_bs = 1;
        p.snr_bonus_db = sc_.attack.snr_bonus_db;
        eng.transmit_later(eng.jitter(), n.id, p, sc_.radio.control_power_dbm);
    }
}

void LeachProtocol::evaluate_joins(Engine& eng) {
    const double now = eng.now();
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation || !n.alive() || !n.awake) continue;
        if (n.role == Role::ClusterHead || attacking(n, now)) continue;
        auto it = adverts_heard_.find(n.id);
        if (it == adverts_heard_.end() || it->second.empty()) continue;
        // entries are (advertiser, score); pick the strongest
        NodeId best = kBroadcast;
        double best_score = 0.0;
        for (const auto& [from, score] : it->second) {
            if (!eng.node(from).alive()) continue;
            if (eng.node(from).malicious && lure_load_[from] >= sc_.attack.capacity)
                continue;  // the lure is full and stops answering confirms
            if (best == kBroadcast || score > best_score ||
                (score == best_score && from < best)) {
                best = from;
                best_score = score;
            }
        }
        if (best == kBroadcast) continue;
        if (eng.node(best).malicious) ++lure_load_[best];
        NodeInfo& ni = info_[n.id];
        ni.head = best;
        Packet confirm;
        confirm.kind = PacketKind::JoinConfirm;
        confirm.dst = best;
        confirm.payload_bytes = kJoinBytes;
        confirm.created_s = now;
        eng.transmit(n.id, confirm,
                     pick_unicast_power(eng.radio(), distance(n.pos, eng.node(best).pos)));
    }
    schedule_frame(eng, current_round_);
}

void LeachProtocol::schedule_frame(Engine& eng, int round) {
    const double now = eng.now();
    const double slot_len = eng.serialization_delay(sc_.payload_max_bytes * 8) +
                            eng.processing_delay() + kGuardS;
    const double frame_start = now + 0.2;

    if (heads_.empty()) {
        // nobody self-elected: pending sources send straight to the sink
        for (auto& n : eng.nodes()) {
            if (n.role == Role::BaseStation || !n.alive()) continue;
            if (attacking(n, now) || info_[n.id].outbox.empty()) continue;
            eng.schedule_timer(frame_start + eng.jitter(), n.id, kTmDirect, round);
        }
        return;
    }

    // nodes outside every advert's reach serve themselves this round
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation || !n.alive()) continue;
        if (n.role == Role::ClusterHead || attacking(n, now)) continue;
        if (info_[n.id].head != kBroadcast || info_[n.id].outbox.empty()) continue;
        eng.schedule_timer(frame_start + eng.jitter(), n.id, kTmDirect, round);
    }

    // per-head TDMA frames run in parallel (cluster channels are orthogonal)
    std::map<NodeId, std::vector<NodeId>> members;
    for (auto& n : eng.nodes()) {
        if (n.role == Role::BaseStation || !n.alive()) continue;
        const NodeInfo& ni = info_[n.id];
        if (ni.head != kBroadcast && !ni.outbox.empty())
            members[ni.head].push_back(n.id);
    }
    double frame_len_max = 0.0;
    for (auto& [head, mlist] : members) {
        std::sort(mlist.begin(), mlist.end());
        // schedule broadcast from the head
        Packet sched;
        sched.kind = PacketKind::TdmaSchedule;
        sched.dst = kBroadcast;
        sched.payload_bytes = 8 + 2 * static_cast<int>(mlist.size());
        sched.created_s = now;
        if (eng.node(head).alive())
            eng.transmit_later(eng.jitter(), head, sched, sc_.radio.control_power_dbm);
        for (std::size_t i = 0; i < mlist.size(); ++i)
            eng.schedule_timer(frame_start + static_cast<double>(i) * slot_len,
                               mlist[i], kTmSlot, round);
        frame_len_max = std::max(frame_len_max, slot_len * mlist.size());
    }
    // heads dispatch to the BS once their frame closes
    for (NodeId h : heads_)
        eng.schedule_timer(frame_start + frame_len_max + 0.05, h, kTmDispatch, round);
}

void LeachProtocol::member_slot(Engine& eng, NodeId id) {
    NodeState& n = eng.node(id);
    if (!n.alive()) return;
    NodeInfo& ni = info_[id];
    if (ni.head == kBroadcast || ni.outbox.empty()) return;
    const NodeState& head = eng.node(ni.head);
    if (!head.alive()) return;

    Packet p;
    p.kind = PacketKind::Data;
    p.dst = ni.head;
    int payload = sc_.payload_min_bytes;
    for (const auto& r : ni.outbox) {
        auto it = ni.payload_by_uid.find(r.uid);
        payload = std::max(payload, it != ni.payload_by_uid.end()
                                        ? it->second
                                        : sc_.payload_max_bytes);
    }
    p.payload_bytes = payload;
    p.created_s = eng.now();
    p.sources = ni.outbox;

    const double power = pick_unicast_power(eng.radio(), distance(n.pos, head.pos));
    if (eng.transmit(id, p, power)) {
        for (const auto& r : ni.outbox)
            if (r.origin == id) ledger_.record_transmitted(r.uid, eng.now());
        ni.outbox.clear();
    }
}

void LeachProtocol::head_dispatch(Engine& eng, NodeId id) {
    NodeState& n = eng.node(id);
    if (!n.alive() || n.role != Role::ClusterHead) return;
    NodeInfo& ni = info_[id];

    std::vector<SourceRecord> recs;
    std::set<std::uint64_t> seen;
    for (const auto& r : ni.collected)
        if (seen.insert(r.uid).second) recs.push_back(r);
    for (const auto& r : ni.outbox)
        if (seen.insert(r.uid).second) recs.push_back(r);
    ni.collected.clear();
    ni.outbox.clear();

    Packet p;
    p.kind = PacketKind::Aggregate;
    p.dst = kBsId;
    p.payload_bytes = sc_.payload_max_bytes;
    p.created_s = eng.now();
    p.sources = recs;
    // classic single-hop LEACH: the BS hop always runs at full power
    if (eng.transmit(id, p, eng.radio().max_power_dbm()))
        for (const auto& r : recs)
            if (r.origin == id) ledger_.record_transmitted(r.uid, eng.now());
}

void LeachProtocol::adopt(NodeInfo& ni, const std::vector<SourceRecord>& recs) {
    for (const auto& r : recs) {
        bool dup = false;
        for (const auto& e : ni.outbox)
            if (e.uid == r.uid) { dup = true; break; }
        if (!dup) {
            ni.outbox.push_back(r);
            ni.payload_by_uid.emplace(r.uid, sc_.payload_max_bytes);
        }
    }
}

void LeachProtocol::on_deliver(Engine& eng, NodeId to, const Packet& pkt) {
    NodeState& self = eng.node(to);
    NodeInfo& ni = info_[to];
    const double now = eng.now();

    switch (pkt.kind) {
        case PacketKind::ChAdvert: {
            if (to == kBsId || attacking(self, now)) return;
            if (self.role == Role::ClusterHead) return;
            eng.charge_rx(to, pkt.bits());
            const double d = distance(eng.node(pkt.src).pos, self.pos);
            const LinkBudget lb = link_budget(pkt.tx_power_dbm, d, eng.radio());
            adverts_heard_[to].emplace_back(pkt.src, lb.snr_db + pkt.snr_bonus_db);
            return;
        }
        case PacketKind::TdmaSchedule:
            if (to != kBsId && ni.head == pkt.src) eng.charge_rx(to, pkt.bits());
            return;
        case PacketKind::Data:
        case PacketKind::Aggregate: {
            if (to == kBsId) {
                ledger_.record_bs_delivery(pkt.sources, now);
                return;
            }
            if (attacking(self, now)) {
                if (capture_action(sc_.attack, eng.rng()) == CaptureAction::Drop) return;
                auto target = divert_target(
                    eng.nodes(), to,
                    max_range_m(sc_.radio.control_power_dbm, eng.radio()), eng.rng());
                if (!target) return;
                Packet p = pkt;
                p.dst = *target;
                eng.transmit(to, p, sc_.radio.control_power_dbm);
                return;
            }
            if (self.role == Role::ClusterHead && pkt.kind == PacketKind::Data &&
                info_[pkt.src].head == to) {
                eng.debit_aggregation(to, pkt.bits());
                if (!self.alive()) return;
                for (const auto& r : pkt.sources) ni.collected.push_back(r);
                return;
            }
            adopt(ni, pkt.sources);  // diverted stray, carried next round
            return;
        }
        default:
            return;
    }
}

void LeachProtocol::on_timer(Engine& eng, NodeId owner, int tag, std::int64_t arg) {
    switch (tag) {
        case kTmJoin: evaluate_joins(eng); return;
        case kTmSlot: member_slot(eng, owner); return;
        case kTmDispatch: head_dispatch(eng, owner); return;
        case kTmDirect: {
            NodeState& n = eng.node(owner);
            if (!n.alive()) return;
            NodeInfo& ni = info_[owner];
            if (ni.outbox.empty()) return;
            Packet p;
            p.kind = PacketKind::Data;
            p.dst = kBsId;
            p.payload_bytes = sc_.payload_max_bytes;
            p.created_s = eng.now();
            p.sources = ni.outbox;
            if (eng.transmit(owner, p, eng.radio().max_power_dbm())) {
                for (const auto& r : ni.outbox)
                    if (r.origin == owner) ledger_.record_transmitted(r.uid, eng.now());
                ni.outbox.clear();
            }
            return;
        }
        case kTmSource: {
            const auto& plan = sources_[static_cast<std::size_t>(arg)];
            ledger_.record_source_packet(plan.uid, plan.origin, eng.now());
            NodeState& n = eng.node(plan.origin);
            if (!n.alive()) return;
            info_[plan.origin].outbox.push_back(
                SourceRecord{plan.uid, plan.origin, eng.now()});
            info_[plan.origin].payload_by_uid[plan.uid] = plan.payload_bytes;
            return;
        }
        case kTmActivate:
            for (auto& n : eng.nodes())
                if (n.malicious && n.role != Role::BaseStation) n.role = Role::Malicious;
            return;
        default:
            return;
    }
}

// --- PEGASIS -----------------------------------------------------------------

PegasisProtocol::PegasisProtocol(const Scenario& sc, MetricsLedger& ledger,
                                 std::vector<SourcePlanEntry> sources)
    : sc_(sc), ledger_(ledger), sources_(std::move(sources)) {}

bool PegasisProtocol::attacking(const NodeState& n, double now) const {
    return n.malicious && now >= sc_.attack.activation_s;
}

void PegasisProtocol::start(Engine& eng) {
    info_.assign(eng.nodes().size(), NodeInfo{});
    hop_slot_s_ = eng.serialization_delay(sc_.payload_max_bytes * 8) +
                  eng.processing_delay() + kGuardS;
    for (std::size_t i = 0; i < sources_.size(); ++i)
        eng.schedule_timer(sources_[i].at_s, sources_[i].origin, kTmSource,
                           static_cast<std::int64_t>(i));
    bool any_malicious = false;
    for (const auto& n : eng.nodes()) any_malicious |= n.malicious;
    if (any_malicious)
        eng.schedule_timer(sc_.attack.activation_s, kBsId, kTmActivate, 0);
    rebuild_chain(eng);
    eng.schedule_round(kFirstRound, 1);
}

void PegasisProtocol::rebuild_chain(Engine& eng) {
    std::vector<const NodeState*> alive;
    for (const auto& n : eng.nodes())
        if (n.role != Role::BaseStation && n.alive()) alive.push_back(&n);
    chain_pos_.clear();
    if (alive.size() < 2) {
        chain_.order.clear();
        return;
    }
    chain_ = pegasis_build_chain(alive, sc_.bs_pos);
    for (std::size_t i = 0; i < chain_.order.size(); ++i)
        chain_pos_[chain_.order[i]] = static_cast<int>(i);
}

void PegasisProtocol::on_round(Engine& eng, int round) {
    const double t = eng.now();
    chain_tx_last_round_ = 0;

    bool stale = false;
    for (NodeId id : chain_.order)
        if (!eng.node(id).alive()) stale = true;
    if (stale || chain_.order.empty()) rebuild_chain(eng);
    if (chain_.order.size() < 2) return;  // nothing left to gather

    const int len = static_cast<int>(chain_.order.size());
    // turn-taking by node id: leaders land all over the field instead of
    // marching down the chain from its far end
    std::vector<NodeId> by_id(chain_.order);
    std::sort(by_id.begin(), by_id.end());
    leader_ = by_id[static_cast<std::size_t>((round - 1) % len)];
    chain_.leader_index = chain_pos_.at(leader_);
    for (auto& ni : info_) ni.pass_buffer.clear();

    // Both halves run slot-paced toward the leader; a silent (or hostile)
    // relay cannot stall the nodes behind it.
    const int lead = chain_.leader_index;
    double latest = 0.0;
    for (int i = 0; i < len; ++i) {
        if (i == lead) continue;
        const int slot = i < lead ? i : (len - 1 - i);
        const double at = t + slot * hop_slot_s_;
        latest = std::max(latest, at);
        eng.schedule_timer(at, chain_.order[static_cast<std::size_t>(i)], kTmChainSlot,
                           round);
    }
    pass_end_s_ = latest + hop_slot_s_;
    eng.schedule_timer(pass_end_s_, leader_, kTmLeader, round);

    const double next = std::max(t + sc_.round_period_s, pass_end_s_ + 0.05);
    if (next <= eng.end_time()) eng.schedule_round(next, round + 1);
}

void PegasisProtocol::chain_slot(Engine& eng, NodeId id, int round) {
    NodeState& n = eng.node(id);
    if (!n.alive()) return;
    auto pos_it = chain_pos_.find(id);
    if (pos_it == chain_pos_.end()) return;
    const int pos = pos_it->second;
    const int lead = chain_.leader_index;
    const int next_pos = pos < lead ? pos + 1 : pos - 1;
    if (next_pos < 0 || next_pos >= static_cast<int>(chain_.order.size())) return;
    const NodeId next = chain_.order[static_cast<std::size_t>(next_pos)];
    if (!eng.node(next).alive()) return;

    NodeInfo& ni = info_[id];
    std::vector<SourceRecord> recs;
    std::set<std::uint64_t> seen;
    for (const auto& r : ni.pass_buffer)
        if (seen.insert(r.uid).second) recs.push_back(r);
    for (const auto& r : ni.outbox)
        if (seen.insert(r.uid).second) recs.push_back(r);
    ni.pass_buffer.clear();
    ni.outbox.clear();

    // every chain node transmits its fused frame each round, data or not
    Packet p;
    p.kind = PacketKind::Aggregate;
    p.dst = next;
    p.payload_bytes = sc_.payload_max_bytes;
    p.created_s = eng.now();
    p.sources = recs;
    ++chain_tx_last_round_;
    if (eng.transmit(id, p, pick_unicast_power(eng.radio(),
                                               distance(n.pos, eng.node(next).pos)))) {
        for (const auto& r : recs)
            if (r.origin == id) ledger_.record_transmitted(r.uid, eng.now());
    }
}

void PegasisProtocol::leader_dispatch(Engine& eng, NodeId id, int round) {
    NodeState& n = eng.node(id);
    if (!n.alive()) return;
    NodeInfo& ni = info_[id];
    if (attacking(n, eng.now())) {
        // a hostile leader simply swallows the round
        ni.pass_buffer.clear();
        return;
    }
    std::vector<SourceRecord> recs;
    std::set<std::uint64_t> seen;
    for (const auto& r : ni.pass_buffer)
        if (seen.insert(r.uid).second) recs.push_back(r);
    for (const auto& r : ni.outbox)
        if (seen.insert(r.uid).second) recs.push_back(r);
    ni.pass_buffer.clear();
    ni.outbox.clear();

    Packet p;
    p.kind = PacketKind::Aggregate;
    p.dst = kBsId;
    p.payload_bytes = sc_.payload_max_bytes;
    p.created_s = eng.now();
    p.sources = recs;
    const double d = distance(n.pos, sc_.bs_pos);
    double power = eng.radio().max_power_dbm();
    for (double lvl : eng.radio().tx_power_dbm)
        if (max_range_m(lvl, eng.radio()) >= d * 1.001) { power = lvl; break; }
    if (eng.transmit(id, p, power))
        for (const auto& r : recs)
            if (r.origin == id) ledger_.record_transmitted(r.uid, eng.now());
}

void PegasisProtocol::adopt(NodeInfo& ni, const std::vector<SourceRecord>& recs) {
    for (const auto& r : recs) {
        bool dup = false;
        for (const auto& e : ni.outbox)
            if (e.uid == r.uid) { dup = true; break; }
        if (!dup) {
            ni.outbox.push_back(r);
            ni.payload_by_uid.emplace(r.uid, sc_.payload_max_bytes);
        }
    }
}

void PegasisProtocol::on_deliver(Engine& eng, NodeId to, const Packet& pkt) {
    if (pkt.kind != PacketKind::Aggregate && pkt.kind != PacketKind::Data) return;
    if (to == kBsId) {
        ledger_.record_bs_delivery(pkt.sources, eng.now());
        return;
    }
    NodeState& self = eng.node(to);
    NodeInfo& ni = info_[to];
    if (attacking(self, eng.now())) {
        if (pkt.sources.empty()) return;
        if (capture_action(sc_.attack, eng.rng()) == CaptureAction::Drop) return;
        auto target = divert_target(
            eng.nodes(), to, max_range_m(sc_.radio.control_power_dbm, eng.radio()),
            eng.rng());
        if (!target) return;
        Packet p = pkt;
        p.dst = *target;
        eng.transmit(to, p, sc_.radio.control_power_dbm);
        return;
    }
    // frame from a chain neighbour headed my way, or a diverted stray
    auto mypos = chain_pos_.find(to);
    auto srcpos = chain_pos_.find(pkt.src);
    if (mypos != chain_pos_.end() && srcpos != chain_pos_.end()) {
        const int lead = chain_.leader_index;
        const int expect_from = mypos->second < lead ? mypos->second - 1
                                                     : mypos->second + 1;
        const bool leader_inflow =
            mypos->second == lead && std::abs(srcpos->second - lead) == 1;
        if (srcpos->second == expect_from || leader_inflow) {
            for (const auto& r : pkt.sources) ni.pass_buffer.push_back(r);
            return;
        }
    }
    adopt(ni, pkt.sources);
    return;
}

void PegasisProtocol::on_timer(Engine& eng, NodeId owner, int tag, std::int64_t arg) {
    switch (tag) {
        case kTmChainSlot: chain_slot(eng, owner, static_cast<int>(arg)); return;
        case kTmLeader: leader_dispatch(eng, owner, static_cast<int>(arg)); return;
        case kTmSource: {
            const auto& plan = sources_[static_cast<std::size_t>(arg)];
            ledger_.record_source_packet(plan.uid, plan.origin, eng.now());
            NodeState& n = eng.node(plan.origin);
            if (!n.alive()) return;
            info_[plan.origin].outbox.push_back(
                SourceRecord{plan.uid, plan.origin, eng.now()});
            info_[plan.origin].payload_by_uid[plan.uid] = plan.payload_bytes;
            return;
        }
        case kTmActivate:
            for (auto& n : eng.nodes())
                if (n.malicious && n.role != Role::BaseStation) n.role = Role::Malicious;
            return;
        default:
            return;
    }
}

}  // namespace wsnsim
