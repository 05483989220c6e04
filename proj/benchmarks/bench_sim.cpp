#include <benchmark/benchmark.h>

#include "wsnsim/baselines.hpp"
#include "wsnsim/engine.hpp"
#include "wsnsim/esrpsdc.hpp"
#include "wsnsim/harness.hpp"

using namespace wsnsim;

static void BM_LinkBudget(benchmark::State& state) {
    RadioConfig cfg;
    double d = 1.0;
    for (auto _ : state) {
        auto lb = link_budget(8.0, d, cfg);
        benchmark::DoNotOptimize(lb);
        d = d < 1400.0 ? d + 1.0 : 1.0;
    }
}
BENCHMARK(BM_LinkBudget);

static void BM_TxEnergy(benchmark::State& state) {
    EnergyModel em;
    double d = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(tx_energy(560, d, em));
        d = d < 1400.0 ? d + 1.0 : 1.0;
    }
}
BENCHMARK(BM_TxEnergy);

static void BM_ChThreshold(benchmark::State& state) {
    NodeState n;
    n.id = 1;
    n.energy_j = 0.3;
    n.energy_init_j = 0.5;
    n.level = 2;
    LevelBand band{2, 377.0, 670.0};
    ThresholdParams params;
    for (auto _ : state)
        benchmark::DoNotOptimize(ch_threshold(n, 7, band, params, 450.0));
}
BENCHMARK(BM_ChThreshold);

static void BM_EventQueue(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        state.PauseTiming();
        std::vector<NodeState> nodes(2);
        nodes[0].id = 0;
        nodes[0].role = Role::BaseStation;
        nodes[1].id = 1;
        nodes[1].energy_j = nodes[1].energy_init_j = 1.0;
        Engine eng(nodes, RadioConfig{}, EnergyModel{}, 1, 1e9);
        Rng rng(7);
        state.ResumeTiming();
        for (int i = 0; i < n; ++i)
            eng.schedule_timer(rng.uniform(0.0, 1e6), 1, 1, 0);
        benchmark::DoNotOptimize(eng.run(1e9));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EventQueue)->Range(1 << 10, 1 << 16);

static void BM_ChainBuild(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::vector<NodeState> storage;
    Rng rng(11);
    for (NodeId i = 1; i <= static_cast<NodeId>(n); ++i) {
        NodeState node;
        node.id = i;
        node.pos = {rng.uniform(0, 1000), rng.uniform(0, 1000)};
        node.energy_j = node.energy_init_j = 0.5;
        storage.push_back(node);
    }
    std::vector<const NodeState*> nodes;
    for (const auto& s : storage) nodes.push_back(&s);
    for (auto _ : state)
        benchmark::DoNotOptimize(pegasis_build_chain(nodes, {50.0, 75.0}));
}
BENCHMARK(BM_ChainBuild)->Arg(100)->Arg(500);

static void BM_Partition(benchmark::State& state) {
    std::vector<NodeState> storage;
    Rng rng(13);
    for (NodeId i = 1; i <= 500; ++i) {
        NodeState node;
        node.id = i;
        node.pos = {rng.uniform(0, 1000), rng.uniform(0, 1000)};
        storage.push_back(node);
    }
    std::vector<const NodeState*> nodes;
    for (const auto& s : storage) nodes.push_back(&s);
    for (auto _ : state)
        benchmark::DoNotOptimize(partition_clusters(nodes, 20));
}
BENCHMARK(BM_Partition);

static void BM_FullRun(benchmark::State& state) {
    Scenario sc;
    sc.n_nodes = static_cast<int>(state.range(0));
    sc.n_clusters = std::max(2, sc.n_nodes / 10);
    sc.sim_time_s = 120.0;
    sc.load_packets = sc.n_nodes / 2;
    sc.protocol = ProtocolKind::Esrpsdc;
    for (auto _ : state) {
        sc.seed = static_cast<std::uint64_t>(state.iterations());
        benchmark::DoNotOptimize(run_one(sc));
    }
}
BENCHMARK(BM_FullRun)->Arg(100)->Arg(250)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
