#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <queue>
#include <random>
#include <vector>

#include "wsnsim/core.hpp"
#include "wsnsim/radio.hpp"

// Deterministic discrete-event kernel: virtual clock, (time, seq)-ordered
// event queue, radio message delivery with serialization/propagation delay,
// per-run seeded randomness, energy accounting, and an optional trace log.

namespace wsnsim {

enum class EventKind { Deliver, Timer, RoundBoundary, PhaseBoundary };

struct Event {
    double at_s = 0.0;
    std::uint64_t seq = 0;  // tie-breaker, assigned at scheduling time
    EventKind kind = EventKind::Timer;
    Packet pkt;       // Deliver
    NodeId target = 0;  // Deliver: receiver; Timer: owner
    int tag = 0;        // Timer: protocol-defined discriminator
    std::int64_t arg = 0;
    int round = 0;  // RoundBoundary
    int phase = 0;  // PhaseBoundary
};

struct SimClock {
    double now_s = 0.0;
    double end_s = 600.0;
};

// Fixed, documented generator: mt19937_64. Identical seed + identical
// scenario means an identical event trace.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen_); }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }
    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_);
    }
    int byte() { return static_cast<int>(index(256)); }

private:
    std::mt19937_64 gen_;
};

struct TraceSummary {
    std::uint64_t events_processed = 0;
    double end_time_s = 0.0;
    std::uint64_t order_hash = 0;  // fold over the dispatch sequence
};

class Engine;

// Protocol logic runs as callbacks on the single engine thread.
class Protocol {
public:
    virtual ~Protocol() = default;
    virtual void start(Engine& eng) = 0;
    virtual void on_deliver(Engine& eng, NodeId to, const Packet& pkt) = 0;
    virtual void on_timer(Engine& eng, NodeId owner, int tag, std::int64_t arg) = 0;
    virtual void on_round(Engine& eng, int round) {}
    virtual void on_phase(Engine& eng, int phase) {}
};

struct EnergyLedger {
    std::vector<double> consumed_j;  // indexed by NodeId
    double total_debited_j = 0.0;    // running sum of every debit
    double first_death_s = -1.0;
    int deaths = 0;
    // diagnostics: where the joules went
    double tx_by_kind[16] = {};
    double rx_by_kind[16] = {};
    double aggregation_j = 0.0;
    double abstracted_j = 0.0;  // direct charge_tx/charge_rx exchanges
};

class Engine {
public:
    Engine(std::vector<NodeState> nodes, RadioConfig radio, EnergyModel energy,
           std::uint64_t seed, double end_s, double processing_delay_s = 1e-3,
           double jitter_max_s = 10e-3);

    // --- event scheduling ------------------------------------------------
    void schedule_timer(double at_s, NodeId owner, int tag, std::int64_t arg = 0);
    void schedule_round(double at_s, int round);
    void schedule_phase(double at_s, int phase);

    // Radio transmission. Debits the sender, schedules Deliver events for
    // the destination (or all receivable nodes when dst == kBroadcast).
    // Returns false when the sender lacked the energy: the partial transmit
    // drains it, the node dies, and nothing is delivered.
    bool transmit(NodeId from, Packet pkt, double power_dbm);

    // Deferred transmit, used to jitter control-phase broadcasts.
    void transmit_later(double delay_s, NodeId from, Packet pkt, double power_dbm);

    // Aggregation cost at a fusing node (drains and kills on shortfall).
    void debit_aggregation(NodeId node, int bits);

    // Direct energy charges for abstracted control exchanges and for
    // broadcast listeners (broadcast deliveries are not auto-debited; the
    // handler charges the nodes that actually listen).
    bool charge_tx(NodeId node, int bits, double d_m);
    bool charge_rx(NodeId node, int bits);

    // Runs until the queue drains or the clock passes min(until_s, end_s).
    TraceSummary run(double until_s);

    // --- state access ----------------------------------------------------
    double now() const { return clock_.now_s; }
    double end_time() const { return clock_.end_s; }
    NodeState& node(NodeId id) { return nodes_.at(id); }
    const NodeState& node(NodeId id) const { return nodes_.at(id); }
    std::vector<NodeState>& nodes() { return nodes_; }
    const std::vector<NodeState>& nodes() const { return nodes_; }
    const RadioConfig& radio() const { return radio_; }
    const EnergyModel& energy_model() const { return energy_; }
    const EnergyLedger& energy_ledger() const { return ledger_; }
    Rng& rng() { return rng_; }
    double processing_delay() const { return processing_delay_s_; }
    double jitter() { return rng_.uniform(0.0, jitter_max_s_); }
    double serialization_delay(int bits) const {
        return bits / radio_.bandwidth_bps;
    }
    std::uint64_t next_uid() { return ++uid_counter_; }

    void set_protocol(Protocol* p) { protocol_ = p; }
    void set_trace(std::ostream* os) { trace_ = os; }

    // initial minus current energy across regular nodes, for the
    // conservation cross-check
    double consumed_total_j() const;
    double initial_total_j() const { return initial_total_j_; }

private:
    struct EventAfter {
        bool operator()(const Event& a, const Event& b) const {
            if (a.at_s != b.at_s) return a.at_s > b.at_s;
            return a.seq > b.seq;
        }
    };

    void push(Event ev);
    bool debit(NodeId id, double cost_j);
    void dispatch(const Event& ev);
    void trace_event(const Event& ev);

    std::vector<NodeState> nodes_;
    RadioConfig radio_;
    EnergyModel energy_;
    SimClock clock_;
    Rng rng_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t seq_counter_ = 0;
    std::uint64_t uid_counter_ = 0;
    Protocol* protocol_ = nullptr;
    std::ostream* trace_ = nullptr;
    EnergyLedger ledger_;
    double initial_total_j_ = 0.0;
    double processing_delay_s_;
    double jitter_max_s_;
    TraceSummary summary_;

    static constexpr double kPropagationSpeed = 3.0e8;  // m/s
};

}  // namespace wsnsim
