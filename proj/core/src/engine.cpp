#include "wsnsim/engine.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace wsnsim {

namespace {

std::uint64_t fold(std::uint64_t h, std::uint64_t v) {
    // FNV-1a style fold, enough to fingerprint the dispatch order.
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

}  // namespace

Engine::Engine(std::vector<NodeState> nodes, RadioConfig radio, EnergyModel energy,
               std::uint64_t seed, double end_s, double processing_delay_s,
               double jitter_max_s)
    : nodes_(std::move(nodes)),
      radio_(std::move(radio)),
      energy_(energy),
      rng_(seed),
      processing_delay_s_(processing_delay_s),
      jitter_max_s_(jitter_max_s) {
    radio_.validate();
    energy_.validate();
    clock_.end_s = end_s;
    ledger_.consumed_j.assign(nodes_.size(), 0.0);
    for (const auto& n : nodes_)
        if (n.role != Role::BaseStation) initial_total_j_ += n.energy_init_j;
}

void Engine::push(Event ev) {
    if (ev.at_s < clock_.now_s)
        throw std::logic_error("engine: scheduling an event in the past");
    ev.seq = ++seq_counter_;
    queue_.push(std::move(ev));
}

void Engine::schedule_timer(double at_s, NodeId owner, int tag, std::int64_t arg) {
    Event ev;
    ev.at_s = at_s;
    ev.kind = EventKind::Timer;
    ev.target = owner;
    ev.tag = tag;
    ev.arg = arg;
    push(std::move(ev));
}

void Engine::schedule_round(double at_s, int round) {
    Event ev;
    ev.at_s = at_s;
    ev.kind = EventKind::RoundBoundary;
    ev.round = round;
    push(std::move(ev));
}

void Engine::schedule_phase(double at_s, int phase) {
    Event ev;
    ev.at_s = at_s;
    ev.kind = EventKind::PhaseBoundary;
    ev.phase = phase;
    push(std::move(ev));
}

bool Engine::debit(NodeId id, double cost_j) {
    NodeState& n = nodes_.at(id);
    if (n.role == Role::BaseStation) return true;  // sink is mains-powered
    if (cost_j > n.energy_j) {
        // Partial operation: whatever remained is consumed and the node dies.
        ledger_.consumed_j[id] += n.energy_j;
        ledger_.total_debited_j += n.energy_j;
        n.energy_j = 0.0;
        if (ledger_.first_death_s < 0.0) ledger_.first_death_s = clock_.now_s;
        ++ledger_.deaths;
        return false;
    }
    // an exact-cost debit completes and leaves the node dead afterward
    n.energy_j -= cost_j;
    ledger_.consumed_j[id] += cost_j;
    ledger_.total_debited_j += cost_j;
    if (n.energy_j <= 0.0) {
        if (ledger_.first_death_s < 0.0) ledger_.first_death_s = clock_.now_s;
        ++ledger_.deaths;
    }
    return true;
}

bool Engine::transmit(NodeId from, Packet pkt, double power_dbm) {
    NodeState& sender = nodes_.at(from);
    if (!sender.alive())
        throw std::logic_error("engine: dead node attempted to transmit");
    if (pkt.payload_bytes <= 0)
        throw std::logic_error("engine: packet payload must be positive");

    pkt.src = from;
    pkt.tx_power_dbm = power_dbm;
    const int bits = pkt.bits();

    // Unicast pays for the actual link; broadcast pays for the level's
    // full footprint.
    double d_energy;
    if (pkt.dst == kBroadcast) {
        d_energy = max_range_m(power_dbm, radio_);
    } else {
        d_energy = distance(sender.pos, nodes_.at(pkt.dst).pos);
    }
    const double tx_cost = tx_energy(bits, d_energy, energy_);
    if (sender.role != Role::BaseStation)
        ledger_.tx_by_kind[static_cast<int>(pkt.kind)] += tx_cost;
    if (!debit(from, tx_cost)) return false;

    const double serialization = serialization_delay(bits);
    auto deliver_to = [&](NodeId rx_id) {
        const NodeState& rx = nodes_.at(rx_id);
        if (!rx.alive() || rx_id == from) return;
        const double d = distance(sender.pos, rx.pos);
        if (d <= 0.0) return;
        const LinkBudget lb = link_budget(power_dbm, d, radio_);
        if (!lb.receivable) return;
        Event ev;
        ev.at_s = clock_.now_s + serialization + d / kPropagationSpeed;
        ev.kind = EventKind::Deliver;
        ev.pkt = pkt;
        ev.pkt.hops += 1;
        ev.target = rx_id;
        push(std::move(ev));
    };

    if (pkt.dst == kBroadcast) {
        for (const auto& n : nodes_) deliver_to(n.id);
    } else {
        deliver_to(pkt.dst);
    }
    return true;
}

namespace {
constexpr int kTransmitLaterTag = std::numeric_limits<int>::min() + 1;
}

void Engine::transmit_later(double delay_s, NodeId from, Packet pkt, double power_dbm) {
    Event ev;
    ev.at_s = clock_.now_s + delay_s;
    ev.kind = EventKind::Timer;
    ev.target = from;
    ev.tag = kTransmitLaterTag;
    ev.pkt = std::move(pkt);
    ev.pkt.tx_power_dbm = power_dbm;
    push(std::move(ev));
}

void Engine::debit_aggregation(NodeId node_id, int bits) {
    if (bits <= 0) return;
    const double cost = aggregation_energy(bits, energy_);
    ledger_.aggregation_j += cost;
    debit(node_id, cost);
}

bool Engine::charge_tx(NodeId node_id, int bits, double d_m) {
    const double cost = tx_energy(bits, d_m, energy_);
    ledger_.abstracted_j += cost;
    return debit(node_id, cost);
}

bool Engine::charge_rx(NodeId node_id, int bits) {
    const double cost = rx_energy(bits, energy_);
    ledger_.abstracted_j += cost;
    return debit(node_id, cost);
}

void Engine::trace_event(const Event& ev) {
    if (!trace_) return;
    std::ostream& os = *trace_;
    const char* kind = ev.kind == EventKind::Deliver       ? "deliver"
                       : ev.kind == EventKind::Timer       ? "timer"
                       : ev.kind == EventKind::RoundBoundary ? "round"
                                                             : "phase";
    os << "t=" << ev.at_s << " kind=" << kind;
    if (ev.kind == EventKind::Deliver) {
        os << " src=" << ev.pkt.src << " dst=" << ev.target
           << " pkt=" << packet_kind_name(ev.pkt.kind)
           << " bytes=" << ev.pkt.payload_bytes;
    } else {
        os << " src=" << ev.target << " dst=" << ev.target
           << " pkt=none bytes=0";
    }
    os << '\n';
}

void Engine::dispatch(const Event& ev) {
    if (ev.at_s < clock_.now_s)
        throw std::logic_error("engine: clock moved backwards");
    clock_.now_s = ev.at_s;
    ++summary_.events_processed;
    summary_.order_hash = fold(summary_.order_hash,
                               static_cast<std::uint64_t>(ev.kind) * 1000003ull +
                                   ev.target + static_cast<std::uint64_t>(ev.tag));
    trace_event(ev);

    switch (ev.kind) {
        case EventKind::Deliver: {
            NodeState& rx = nodes_.at(ev.target);
            if (!rx.alive()) return;  // died while the frame was in flight
            // Unicast receivers pay reception energy here; broadcast
            // listeners are charged by the handler (nodes outside the
            // listening phase sleep through the frame).
            if (ev.pkt.dst != kBroadcast && rx.role != Role::BaseStation) {
                const double rx_cost = rx_energy(ev.pkt.bits(), energy_);
                ledger_.rx_by_kind[static_cast<int>(ev.pkt.kind)] += rx_cost;
                if (!debit(ev.target, rx_cost)) return;  // reception drained the node
            }
            if (protocol_) protocol_->on_deliver(*this, ev.target, ev.pkt);
            break;
        }
        case EventKind::Timer:
            if (ev.tag == kTransmitLaterTag) {
                if (nodes_.at(ev.target).alive())
                    transmit(ev.target, ev.pkt, ev.pkt.tx_power_dbm);
                break;
            }
            if (protocol_) protocol_->on_timer(*this, ev.target, ev.tag, ev.arg);
            break;
        case EventKind::RoundBoundary:
            if (protocol_) protocol_->on_round(*this, ev.round);
            break;
        case EventKind::PhaseBoundary:
            if (protocol_) protocol_->on_phase(*this, ev.phase);
            break;
    }
}

TraceSummary Engine::run(double until_s) {
    const double horizon = std::min(until_s, clock_.end_s);
    while (!queue_.empty() && queue_.top().at_s <= horizon) {
        Event ev = queue_.top();
        queue_.pop();
        dispatch(ev);
    }
    if (horizon > clock_.now_s) clock_.now_s = horizon;
    summary_.end_time_s = clock_.now_s;
    return summary_;
}

double Engine::consumed_total_j() const {
    double consumed = 0.0;
    for (const auto& n : nodes_)
        if (n.role != Role::BaseStation) consumed += n.energy_init_j - n.energy_j;
    return consumed;
}

}  // namespace wsnsim
