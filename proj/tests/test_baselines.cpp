#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "wsnsim/baselines.hpp"
#include "wsnsim/harness.hpp"

using namespace wsnsim;

namespace {

NodeState node_at(NodeId id, double x, double y, double energy = 0.5) {
    NodeState n;
    n.id = id;
    n.pos = {x, y};
    n.energy_j = n.energy_init_j = energy;
    n.level = 1;
    return n;
}

// Prim's algorithm, the independent yardstick for the chain-length bound.
double mst_weight(const std::vector<const NodeState*>& nodes) {
    const std::size_t n = nodes.size();
    std::vector<bool> in(n, false);
    std::vector<double> best(n, 1e18);
    best[0] = 0.0;
    double total = 0.0;
    for (std::size_t it = 0; it < n; ++it) {
        std::size_t u = n;
        for (std::size_t i = 0; i < n; ++i)
            if (!in[i] && (u == n || best[i] < best[u])) u = i;
        in[u] = true;
        total += best[u];
        for (std::size_t v = 0; v < n; ++v)
            if (!in[v])
                best[v] = std::min(best[v], distance(nodes[u]->pos, nodes[v]->pos));
    }
    return total;
}

double chain_length(const Chain& chain, const std::vector<NodeState>& storage) {
    double len = 0.0;
    for (std::size_t i = 1; i < chain.order.size(); ++i)
        len += distance(storage[chain.order[i - 1] - 1].pos,
                        storage[chain.order[i] - 1].pos);
    return len;
}

}  // namespace

TEST_CASE("leach self-election threshold") {
    // at the cycle reset every candidate sees the bare percentage
    CHECK(leach_threshold(0.05, 20, kNeverServed) == doctest::Approx(0.05));
    CHECK(leach_threshold(0.05, 40, kNeverServed) == doctest::Approx(0.05));
    // ten rounds into the cycle: p / (1 - p*10)
    CHECK(leach_threshold(0.05, 10, kNeverServed) == doctest::Approx(0.1));
    // a node that led recently sits out
    CHECK(leach_threshold(0.05, 10, 0) == 0.0);
    CHECK(leach_threshold(0.05, 10, 19) == 0.0);
    CHECK(leach_threshold(0.05, 10, 20) == doctest::Approx(0.1));
    // the tail of the cycle saturates at certainty
    CHECK(leach_threshold(0.05, 19, kNeverServed) == doctest::Approx(1.0));
    CHECK_THROWS_AS(leach_threshold(0.0, 1, kNeverServed), std::invalid_argument);
}

TEST_CASE("expected head count stays near p*n over many election rounds") {
    const int n = 500;
    const double p = 0.05;
    Rng rng(2024);
    double total = 0.0;
    const int rounds = 1000;
    for (int r = 0; r < rounds; ++r) {
        int heads = 0;
        for (int i = 0; i < n; ++i)
            if (rng.uniform() < leach_threshold(p, 20, kNeverServed)) ++heads;
        total += heads;
    }
    const double mean = total / rounds;
    const double sigma = std::sqrt(n * p * (1 - p) / rounds);
    CHECK(std::abs(mean - n * p) < 3.0 * sigma);
}

TEST_CASE("greedy chain on collinear points starts at the far end") {
    std::vector<NodeState> storage{node_at(1, 0, 0), node_at(2, 10, 0),
                                   node_at(3, 30, 0)};
    std::vector<const NodeState*> nodes;
    for (auto& n : storage) nodes.push_back(&n);
    // the sink sits far beyond x = 30, so x = 0 is the farthest point
    const Chain chain = pegasis_build_chain(nodes, {1000.0, 0.0});
    CHECK(chain.order == std::vector<NodeId>{1, 2, 3});
}

TEST_CASE("two nodes form the only possible chain") {
    std::vector<NodeState> storage{node_at(1, 100, 100), node_at(2, 200, 200)};
    std::vector<const NodeState*> nodes{&storage[0], &storage[1]};
    const Chain chain = pegasis_build_chain(nodes, {50.0, 75.0});
    CHECK(chain.order.size() == 2);
    CHECK(chain.order[0] == 2);  // farther from the sink
    CHECK_THROWS_AS(pegasis_build_chain({&storage[0]}, Position{50.0, 75.0}),
                    std::invalid_argument);
}

TEST_CASE("chains visit each node exactly once") {
    Rng rng(64);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<NodeState> storage;
        const int n = 3 + static_cast<int>(rng.index(30));
        for (NodeId i = 1; i <= static_cast<NodeId>(n); ++i)
            storage.push_back(node_at(i, rng.uniform(0, 1000), rng.uniform(0, 1000)));
        std::vector<const NodeState*> nodes;
        for (auto& s : storage) nodes.push_back(&s);
        const Chain chain = pegasis_build_chain(nodes, {50.0, 75.0});
        std::set<NodeId> seen(chain.order.begin(), chain.order.end());
        CHECK(chain.order.size() == storage.size());
        CHECK(seen.size() == storage.size());
    }
}

TEST_CASE("greedy chain stays within twice the spanning-tree weight") {
    Rng rng(1717);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<NodeState> storage;
        const int n = 4 + static_cast<int>(rng.index(9));  // up to 12 nodes
        for (NodeId i = 1; i <= static_cast<NodeId>(n); ++i)
            storage.push_back(node_at(i, rng.uniform(0, 1000), rng.uniform(0, 1000)));
        std::vector<const NodeState*> nodes;
        for (auto& s : storage) nodes.push_back(&s);
        const Chain chain = pegasis_build_chain(nodes, {50.0, 75.0});
        CHECK(chain_length(chain, storage) <= 2.0 * mst_weight(nodes) + 1e-9);
    }
}

namespace {

struct PegasisRun {
    Deployment dep;
    MetricsLedger ledger;
    std::unique_ptr<Engine> eng;
    std::unique_ptr<PegasisProtocol> proto;
};

PegasisRun run_pegasis(const Scenario& sc, Deployment dep) {
    PegasisRun r;
    r.dep = std::move(dep);
    r.eng = std::make_unique<Engine>(r.dep.nodes, sc.radio, sc.energy, sc.seed,
                                     sc.sim_time_s, sc.processing_delay_s,
                                     sc.jitter_max_s);
    r.proto = std::make_unique<PegasisProtocol>(sc, r.ledger, r.dep.sources);
    r.eng->set_protocol(r.proto.get());
    r.proto->start(*r.eng);
    return r;
}

}  // namespace

TEST_CASE("a five-node round costs four chain transmissions and one sink hop") {
    Scenario sc;
    sc.protocol = ProtocolKind::Pegasis;
    sc.n_nodes = 5;
    sc.n_clusters = 5;
    sc.sim_time_s = 6.0;  // exactly one gathering round
    sc.load_packets = 1;
    sc.send_interval_s = 0.5;
    sc.seed = 1;

    // sink at the origin; the chain runs 2-4-1-5-3 so node 1 (the first
    // leader by id order) sits exactly in the middle
    Deployment dep;
    NodeState bs;
    bs.id = 0;
    bs.role = Role::BaseStation;
    bs.pos = {0.0, 0.0};
    sc.bs_pos = bs.pos;
    dep.nodes = {bs, node_at(1, 300, 0), node_at(2, 500, 0), node_at(3, 100, 0),
                 node_at(4, 400, 0), node_at(5, 200, 0)};
    dep.sources = {{1, 1, 0.1, 50}};

    auto run = run_pegasis(sc, dep);
    run.eng->run(sc.sim_time_s);

    CHECK(run.proto->chain().order == std::vector<NodeId>{2, 4, 1, 5, 3});
    CHECK(run.proto->current_leader() == 1);
    CHECK(run.proto->chain().leader_index == 2);
    CHECK(run.proto->chain_transmissions_last_round() == 4);
    CHECK(run.ledger.n_received() == 1);  // the leader's own packet reached the sink
}

TEST_CASE("the leadership rotates through node ids round by round") {
    Scenario sc;
    sc.protocol = ProtocolKind::Pegasis;
    sc.n_nodes = 4;
    sc.n_clusters = 4;
    sc.sim_time_s = 16.0;  // several rounds
    sc.load_packets = 1;
    sc.send_interval_s = 0.5;
    sc.seed = 1;
    Deployment dep;
    NodeState bs;
    bs.id = 0;
    bs.role = Role::BaseStation;
    bs.pos = {0.0, 0.0};
    sc.bs_pos = bs.pos;
    dep.nodes = {bs, node_at(1, 100, 0), node_at(2, 200, 0), node_at(3, 300, 0),
                 node_at(4, 400, 0)};
    dep.sources = {{1, 2, 0.1, 50}};

    auto run = run_pegasis(sc, dep);
    // after round k the leader is the k-th id (1-based, wrapping)
    run.eng->run(5.9);
    CHECK(run.proto->current_leader() == 1);
    run.eng->run(10.9);
    CHECK(run.proto->current_leader() == 2);
    run.eng->run(15.9);
    CHECK(run.proto->current_leader() == 3);
}

TEST_CASE("a death shrinks the rebuilt chain") {
    Scenario sc;
    sc.protocol = ProtocolKind::Pegasis;
    sc.n_nodes = 6;
    sc.n_clusters = 6;
    sc.sim_time_s = 40.0;
    sc.load_packets = 1;
    sc.send_interval_s = 0.5;
    sc.seed = 1;
    Deployment dep;
    NodeState bs;
    bs.id = 0;
    bs.role = Role::BaseStation;
    bs.pos = {0.0, 0.0};
    sc.bs_pos = bs.pos;
    dep.nodes = {bs, node_at(1, 100, 0), node_at(2, 150, 0), node_at(3, 200, 0),
                 node_at(4, 250, 0), node_at(5, 300, 0), node_at(6, 350, 0)};
    // node 6 cannot even pay for one chain frame
    dep.nodes[6].energy_j = dep.nodes[6].energy_init_j = 1e-6;
    dep.sources = {{1, 1, 0.1, 50}};

    auto run = run_pegasis(sc, dep);
    run.eng->run(sc.sim_time_s);
    CHECK_FALSE(run.eng->node(6).alive());
    CHECK(run.proto->chain().order.size() == 5);
    for (NodeId id : run.proto->chain().order) CHECK(id != 6);
}

TEST_CASE("leach delivers through heads and survives a headless round") {
    Scenario sc;
    sc.protocol = ProtocolKind::Leach;
    sc.seed = 3;
    sc.n_nodes = 80;
    sc.n_clusters = 8;
    sc.sim_time_s = 120.0;
    sc.load_packets = 60;
    sc.send_interval_s = 60.0;

    Deployment dep = deploy(sc);
    MetricsLedger ledger;
    Engine eng(dep.nodes, sc.radio, sc.energy, sc.seed, sc.sim_time_s,
               sc.processing_delay_s, sc.jitter_max_s);
    LeachProtocol proto(sc, ledger, dep.sources);
    eng.set_protocol(&proto);
    proto.start(eng);
    eng.run(sc.sim_time_s);

    CHECK(ledger.n_transmitted() == 60);
    CHECK(ledger.pdr_or_zero() > 0.5);
    CHECK(ledger.mean_delay_s() > 0.0);
    CHECK(ledger.mean_delay_s() < 30.0);
}

TEST_CASE("identical substrate: protocols share deployment and metric schema") {
    Scenario sc;
    sc.seed = 12;
    sc.n_nodes = 40;
    sc.n_clusters = 4;
    sc.sim_time_s = 60.0;
    sc.load_packets = 20;

    // deployment geometry and traffic do not depend on the protocol choice
    sc.protocol = ProtocolKind::Esrpsdc;
    Deployment a = deploy(sc);
    sc.protocol = ProtocolKind::Pegasis;
    Deployment b = deploy(sc);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].pos.x == b.nodes[i].pos.x);
        CHECK(a.nodes[i].pos.y == b.nodes[i].pos.y);
    }
    REQUIRE(a.sources.size() == b.sources.size());
    for (std::size_t i = 0; i < a.sources.size(); ++i) {
        CHECK(a.sources[i].origin == b.sources[i].origin);
        CHECK(a.sources[i].at_s == b.sources[i].at_s);
    }

    // and every protocol emits the same row shape
    for (auto kind : {ProtocolKind::Esrpsdc, ProtocolKind::Leach, ProtocolKind::Pegasis}) {
        sc.protocol = kind;
        const RunResult r = run_one(sc);
        CHECK(r.status == "ok");
        const std::string row = to_csv_row(r);
        CHECK(std::count(row.begin(), row.end(), ',') == 16);
    }
}
