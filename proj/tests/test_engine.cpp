#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "wsnsim/engine.hpp"

using namespace wsnsim;

namespace {

std::vector<NodeState> two_nodes(double d_m, double energy = 1.0) {
    std::vector<NodeState> nodes(3);
    nodes[0].id = 0;
    nodes[0].role = Role::BaseStation;
    nodes[1].id = 1;
    nodes[1].pos = {0.0, 0.0};
    nodes[1].energy_j = nodes[1].energy_init_j = energy;
    nodes[2].id = 2;
    nodes[2].pos = {d_m, 0.0};
    nodes[2].energy_j = nodes[2].energy_init_j = energy;
    return nodes;
}

// records the order timers and deliveries arrive in
struct Recorder : Protocol {
    std::vector<int> tags;
    std::vector<double> deliver_times;
    void start(Engine&) override {}
    void on_deliver(Engine& eng, NodeId, const Packet&) override {
        deliver_times.push_back(eng.now());
    }
    void on_timer(Engine&, NodeId, int tag, std::int64_t) override {
        tags.push_back(tag);
    }
};

// bounces a packet back and forth a fixed number of times
struct PingPong : Protocol {
    int remaining;
    explicit PingPong(int n) : remaining(n) {}
    void start(Engine& eng) override {
        Packet p;
        p.kind = PacketKind::Data;
        p.dst = 2;
        p.payload_bytes = 50;
        eng.transmit(1, p, eng.radio().max_power_dbm());
    }
    void on_deliver(Engine& eng, NodeId to, const Packet& pkt) override {
        if (remaining-- <= 0) return;
        Packet p = pkt;
        p.dst = pkt.src;
        eng.transmit(to, p, eng.radio().max_power_dbm());
    }
    void on_timer(Engine&, NodeId, int, std::int64_t) override {}
};

}  // namespace

TEST_CASE("events at the same instant fire in scheduling order") {
    Engine eng(two_nodes(100.0), RadioConfig{}, EnergyModel{}, 1, 100.0);
    Recorder rec;
    eng.set_protocol(&rec);
    eng.schedule_timer(5.0, 1, 11, 0);
    eng.schedule_timer(5.0, 1, 22, 0);
    eng.schedule_timer(5.0, 1, 33, 0);
    eng.schedule_timer(2.0, 1, 44, 0);
    eng.run(100.0);
    CHECK(rec.tags == std::vector<int>{44, 11, 22, 33});
}

TEST_CASE("scheduling in the past throws, beyond the horizon never fires") {
    Engine eng(two_nodes(100.0), RadioConfig{}, EnergyModel{}, 1, 50.0);
    Recorder rec;
    eng.set_protocol(&rec);
    eng.schedule_timer(10.0, 1, 1, 0);
    eng.schedule_timer(70.0, 1, 2, 0);  // accepted, past end_s
    eng.run(50.0);
    CHECK(rec.tags == std::vector<int>{1});
    CHECK(eng.now() == 50.0);
    CHECK_THROWS_AS(eng.schedule_timer(10.0, 1, 3, 0), std::logic_error);
}

TEST_CASE("serialization and propagation delay") {
    auto nodes = two_nodes(100.0);
    Engine eng(nodes, RadioConfig{}, EnergyModel{}, 1, 100.0);
    Recorder rec;
    eng.set_protocol(&rec);

    Packet p;
    p.kind = PacketKind::Data;
    p.dst = 2;
    p.payload_bytes = 50;  // 400 bits at 20 kbps -> 0.02 s on the air
    eng.transmit(1, p, eng.radio().max_power_dbm());
    eng.run(100.0);
    REQUIRE(rec.deliver_times.size() == 1);
    CHECK(rec.deliver_times[0] ==
          doctest::Approx(0.02 + 100.0 / 3.0e8).epsilon(1e-12));
}

TEST_CASE("unreachable receivers get nothing") {
    // a reception threshold nothing can meet: the frame goes out, the energy
    // is spent, nobody hears it
    RadioConfig deaf;
    deaf.rx_threshold_dbm = 60.0;
    deaf.noise_floor_dbm = 60.0;
    auto nodes = two_nodes(100.0);
    Engine eng(nodes, deaf, EnergyModel{}, 1, 100.0);
    Recorder rec;
    eng.set_protocol(&rec);
    Packet p;
    p.kind = PacketKind::Data;
    p.dst = 2;
    p.payload_bytes = 50;
    CHECK(eng.transmit(1, p, eng.radio().max_power_dbm()));
    CHECK(eng.node(1).energy_j < eng.node(1).energy_init_j);
    eng.run(100.0);
    CHECK(rec.deliver_times.empty());
}

TEST_CASE("exact-cost transmission completes and the sender dies afterward") {
    const EnergyModel em;
    const double cost = tx_energy(400, 100.0, em);
    auto nodes = two_nodes(100.0, cost);
    Engine eng(nodes, RadioConfig{}, em, 1, 100.0);
    Recorder rec;
    eng.set_protocol(&rec);
    Packet p;
    p.kind = PacketKind::Data;
    p.dst = 2;
    p.payload_bytes = 50;
    CHECK(eng.transmit(1, p, eng.radio().max_power_dbm()));
    CHECK(eng.node(1).energy_j == 0.0);
    CHECK_FALSE(eng.node(1).alive());
    eng.run(100.0);
    CHECK(rec.deliver_times.size() == 1);  // the frame still went out

    // a dead node cannot transmit again
    CHECK_THROWS_AS(eng.transmit(1, p, eng.radio().max_power_dbm()), std::logic_error);
}

TEST_CASE("insufficient energy drains the sender and delivers nothing") {
    const EnergyModel em;
    const double cost = tx_energy(400, 100.0, em);
    auto nodes = two_nodes(100.0, cost * 0.5);
    Engine eng(nodes, RadioConfig{}, em, 1, 100.0);
    Recorder rec;
    eng.set_protocol(&rec);
    Packet p;
    p.kind = PacketKind::Data;
    p.dst = 2;
    p.payload_bytes = 50;
    CHECK_FALSE(eng.transmit(1, p, eng.radio().max_power_dbm()));
    CHECK(eng.node(1).energy_j == 0.0);
    CHECK(eng.energy_ledger().first_death_s == 0.0);
    eng.run(100.0);
    CHECK(rec.deliver_times.empty());
}

TEST_CASE("energy conservation over a scripted exchange") {
    auto nodes = two_nodes(150.0);
    Engine eng(nodes, RadioConfig{}, EnergyModel{}, 1, 1000.0);
    PingPong proto(40);
    eng.set_protocol(&proto);
    proto.start(eng);
    eng.run(1000.0);

    const double consumed = eng.consumed_total_j();
    const double debited = eng.energy_ledger().total_debited_j;
    CHECK(consumed > 0.0);
    CHECK(std::abs(consumed - debited) <= 1e-9 * std::max(1.0, consumed));
}

TEST_CASE("identical seed and scenario replay bit-identically") {
    auto run_once = [] {
        auto nodes = two_nodes(150.0);
        Engine eng(nodes, RadioConfig{}, EnergyModel{}, 42, 500.0);
        PingPong proto(60);
        eng.set_protocol(&proto);
        proto.start(eng);
        return eng.run(500.0);
    };
    const TraceSummary a = run_once();
    const TraceSummary b = run_once();
    CHECK(a.events_processed == b.events_processed);
    CHECK(a.order_hash == b.order_hash);
    CHECK(a.end_time_s == b.end_time_s);
}

TEST_CASE("run(t1) then run(t2) equals a single run(t2)") {
    auto make = [] {
        auto nodes = two_nodes(150.0);
        return std::make_pair(nodes, 0);
    };
    auto [nodes, _] = make();

    Engine split(nodes, RadioConfig{}, EnergyModel{}, 9, 500.0);
    PingPong p1(60);
    split.set_protocol(&p1);
    p1.start(split);
    split.run(250.0);
    const TraceSummary s = split.run(500.0);

    Engine whole(nodes, RadioConfig{}, EnergyModel{}, 9, 500.0);
    PingPong p2(60);
    whole.set_protocol(&p2);
    p2.start(whole);
    const TraceSummary w = whole.run(500.0);

    CHECK(s.events_processed == w.events_processed);
    CHECK(s.order_hash == w.order_hash);
    CHECK(split.node(1).energy_j == whole.node(1).energy_j);
    CHECK(split.node(2).energy_j == whole.node(2).energy_j);
}

TEST_CASE("empty queue returns immediately") {
    Engine eng(two_nodes(100.0), RadioConfig{}, EnergyModel{}, 1, 100.0);
    const TraceSummary s = eng.run(100.0);
    CHECK(s.events_processed == 0);
}

TEST_CASE("rng stream is the documented mt19937_64") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    std::mt19937_64 ref(123);
    Rng c(123);
    CHECK(c.uniform() ==
          doctest::Approx(std::uniform_real_distribution<double>(0.0, 1.0)(ref)));
}
