#include "wsnsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "wsnsim/baselines.hpp"
#include "wsnsim/engine.hpp"
#include "wsnsim/esrpsdc.hpp"

namespace wsnsim {

namespace {

// Seed substreams: deployment geometry, attack injection and traffic are
// drawn independently so that paired runs (same seed, different protocol or
// different malicious fraction) share everything they should.
constexpr std::uint64_t kGeometryStream = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kAttackStream = 0xc2b2ae3d27d4eb4full;
constexpr std::uint64_t kTrafficStream = 0x165667b19e3779f9ull;

}  // namespace

Deployment deploy(const Scenario& sc) {
    sc.validate();
    Deployment dep;

    NodeState bs;
    bs.id = 0;
    bs.pos = sc.bs_pos;
    bs.role = Role::BaseStation;
    dep.nodes.push_back(bs);

    Rng geom(sc.seed ^ kGeometryStream);
    for (int i = 1; i <= sc.n_nodes; ++i) {
        NodeState n;
        n.id = static_cast<NodeId>(i);
        n.pos = Position{geom.uniform(0.0, sc.field_m), geom.uniform(0.0, sc.field_m)};
        n.energy_j = sc.init_energy_j;
        n.energy_init_j = sc.init_energy_j;
        dep.nodes.push_back(n);
    }
    if (sc.layout == Layout::SourceSink350m && sc.n_nodes >= 1) {
        // the named preset pins node 1 exactly 350 m from the sink
        Position p{sc.bs_pos.x + 350.0, sc.bs_pos.y};
        if (p.x > sc.field_m) p = Position{sc.bs_pos.x, sc.bs_pos.y + 350.0};
        dep.nodes[1].pos = p;
    }

    Rng attack_rng(sc.seed ^ kAttackStream);
    dep.malicious = inject(dep.nodes, sc.attack, attack_rng);

    // traffic: load_packets sources drawn without replacement among honest
    // nodes (wrapping only when the load exceeds the population)
    Rng traffic(sc.seed ^ kTrafficStream);
    std::vector<NodeId> pool;
    for (const auto& n : dep.nodes)
        if (n.role != Role::BaseStation && !n.malicious) pool.push_back(n.id);
    if (pool.empty()) return dep;

    std::uint64_t uid = 0;
    int remaining = sc.load_packets;
    while (remaining > 0) {
        const std::size_t take =
            std::min<std::size_t>(pool.size(), static_cast<std::size_t>(remaining));
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t j = i + traffic.index(pool.size() - i);
            std::swap(pool[i], pool[j]);
            SourcePlanEntry e;
            e.uid = ++uid;
            e.origin = pool[i];
            e.at_s = traffic.uniform(0.0, sc.send_interval_s);
            e.payload_bytes =
                sc.payload_min_bytes +
                static_cast<int>(traffic.index(static_cast<std::size_t>(
                    sc.payload_max_bytes - sc.payload_min_bytes + 1)));
            dep.sources.push_back(e);
        }
        remaining -= static_cast<int>(take);
    }
    std::sort(dep.sources.begin(), dep.sources.end(),
              [](const SourcePlanEntry& a, const SourcePlanEntry& b) {
                  if (a.at_s != b.at_s) return a.at_s < b.at_s;
                  return a.uid < b.uid;
              });
    return dep;
}

RunResult run_one(const Scenario& sc, const std::string& trace_path) {
    RunResult r;
    r.protocol = protocol_name(sc.protocol);
    r.seed = sc.seed;
    r.n_nodes = sc.n_nodes;
    r.n_clusters = sc.n_clusters;
    r.pct_malicious = sc.attack.fraction * 100.0;
    r.load_packets = sc.load_packets;
    r.payload_bytes = sc.payload_max_bytes;

    try {
        Deployment dep = deploy(sc);
        MetricsLedger ledger;
        Engine eng(dep.nodes, sc.radio, sc.energy, sc.seed, sc.sim_time_s,
                   sc.processing_delay_s, sc.jitter_max_s);

        std::unique_ptr<Protocol> proto;
        EsrpsdcProtocol* esrpsdc = nullptr;
        switch (sc.protocol) {
            case ProtocolKind::Esrpsdc: {
                auto p = std::make_unique<EsrpsdcProtocol>(sc, ledger, dep.sources,
                                                           dep.malicious);
                esrpsdc = p.get();
                proto = std::move(p);
                break;
            }
            case ProtocolKind::Leach:
                proto = std::make_unique<LeachProtocol>(sc, ledger, dep.sources);
                break;
            case ProtocolKind::Pegasis:
                proto = std::make_unique<PegasisProtocol>(sc, ledger, dep.sources);
                break;
        }
        eng.set_protocol(proto.get());

        std::ofstream trace;
        if (!trace_path.empty()) {
            trace.open(trace_path);
            if (!trace) throw std::runtime_error("cannot open trace file " + trace_path);
            eng.set_trace(&trace);
        }

        if (std::getenv("WSNSIM_DUMP_NODES"))
            for (const auto& n : eng.nodes())
                std::fprintf(stderr, "NODE %u %.1f %.1f %d\n", n.id, n.pos.x, n.pos.y,
                             n.malicious ? 1 : 0);
        proto->start(eng);
        eng.run(sc.sim_time_s);

        // conservation: the ledger of debits must equal the drained energy
        const double consumed = eng.consumed_total_j();
        const double debited = eng.energy_ledger().total_debited_j;
        const double scale = std::max(1.0, std::max(consumed, debited));
        if (std::abs(consumed - debited) > 1e-9 * scale)
            throw std::runtime_error("energy conservation violated");
        if (consumed > eng.initial_total_j() * (1.0 + 1e-12))
            throw std::runtime_error("consumed more than the deployed energy");

        if (std::getenv("WSNSIM_DEBUG")) {
            const auto& el = eng.energy_ledger();
            for (int k = 0; k < 12; ++k)
                if (el.tx_by_kind[k] > 1e-6 || el.rx_by_kind[k] > 1e-6)
                    std::fprintf(stderr, "ENERGY %-12s tx=%.3fJ rx=%.3fJ\n",
                                 packet_kind_name(static_cast<PacketKind>(k)),
                                 el.tx_by_kind[k], el.rx_by_kind[k]);
            std::fprintf(stderr, "ENERGY aggregation=%.3fJ abstracted=%.3fJ total=%.3fJ\n",
                         el.aggregation_j, el.abstracted_j, eng.consumed_total_j());
        }
        if (std::getenv("WSNSIM_DEBUG")) {
            int never_tx = 0, tx_lost = 0, ok = 0;
            for (const auto& f : ledger.fates()) {
                if (f.transmitted_s < 0) ++never_tx;
                else if (f.delivered_s < 0) ++tx_lost;
                else ++ok;
            }
            std::fprintf(stderr, "FATES never_tx=%d tx_lost=%d delivered=%d\n",
                         never_tx, tx_lost, ok);
        }
        r.pdr = ledger.pdr_or_zero();
        r.mean_delay_s = ledger.mean_delay_s();
        r.energy_total_mwh = joules_to_mwh(consumed);
        r.energy_per_node_mwh = sc.n_nodes > 0 ? r.energy_total_mwh / sc.n_nodes : 0.0;
        r.first_node_death_s = eng.energy_ledger().first_death_s;
        r.detection_triggered = ledger.detection.triggered;
        r.detection_latency_s =
            ledger.detection.triggered
                ? ledger.detection.first_trigger_s - sc.attack.activation_s
                : -1.0;
        r.true_positives = ledger.detection.true_positives;
        r.false_positives = ledger.detection.false_positives;
        if (esrpsdc && !esrpsdc->invariant_violation().empty())
            r.status = "invariant: " + esrpsdc->invariant_violation();
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (char& c : msg)
            if (c == ',' || c == '\n') c = ';';
        r.status = "error: " + msg;
    }
    return r;
}

void SweepSpec::validate() const {
    if (points.empty()) throw std::runtime_error("sweep: at least one point required");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i] <= points[i - 1])
            throw std::runtime_error("sweep: points must be strictly increasing");
    if (seeds_per_point < 1) throw std::runtime_error("sweep: seeds_per_point must be >= 1");
    if (protocols.empty()) throw std::runtime_error("sweep: no protocols selected");
}

std::vector<RunResult> run_sweep(const SweepSpec& spec, const Scenario& base, int jobs) {
    spec.validate();

    std::vector<ProtocolKind> protos = spec.protocols;
    std::sort(protos.begin(), protos.end(), [](ProtocolKind a, ProtocolKind b) {
        return std::string(protocol_name(a)) < protocol_name(b);
    });
    protos.erase(std::unique(protos.begin(), protos.end()), protos.end());

    struct Job {
        Scenario sc;
    };
    std::vector<Job> jobs_list;
    for (ProtocolKind p : protos)
        for (double point : spec.points)
            for (int s = 1; s <= spec.seeds_per_point; ++s) {
                Scenario sc = base;
                sc.protocol = p;
                sc.seed = static_cast<std::uint64_t>(s);
                switch (spec.axis) {
                    case SweepAxis::Load:
                        sc.load_packets = static_cast<int>(point);
                        break;
                    case SweepAxis::NetworkSize:
                        sc.n_nodes = static_cast<int>(point);
                        break;
                    case SweepAxis::MaliciousFraction:
                        sc.attack.fraction = point;
                        break;
                }
                jobs_list.push_back(Job{sc});
            }

    std::vector<RunResult> results(jobs_list.size());
    const int workers = std::max(1, jobs);
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs_list.size(); ++i)
            results[i] = run_one(jobs_list[i].sc);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= jobs_list.size()) return;
                    results[i] = run_one(jobs_list[i].sc);
                }
            });
        for (auto& t : pool) t.join();
    }
    return results;
}

const char* const kCsvHeader =
    "protocol,seed,n_nodes,n_clusters,pct_malicious,load_packets,payload_bytes,"
    "pdr,mean_delay_s,energy_total_mwh,energy_per_node_mwh,first_node_death_s,"
    "detection_triggered,detection_latency_s,true_positives,false_positives,status";

namespace {

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace

std::string to_csv_row(const RunResult& r) {
    std::ostringstream os;
    os << r.protocol << ',' << r.seed << ',' << r.n_nodes << ',' << r.n_clusters << ','
       << fmt(r.pct_malicious, 2) << ',' << r.load_packets << ',' << r.payload_bytes
       << ',' << fmt(r.pdr, 6) << ',' << fmt(r.mean_delay_s, 6) << ','
       << fmt(r.energy_total_mwh, 9) << ',' << fmt(r.energy_per_node_mwh, 9) << ','
       << fmt(r.first_node_death_s, 3) << ',' << (r.detection_triggered ? 1 : 0) << ','
       << fmt(r.detection_latency_s, 3) << ',' << r.true_positives << ','
       << r.false_positives << ',' << r.status;
    return os.str();
}

std::string to_csv(const std::vector<RunResult>& rows) {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : rows) os << to_csv_row(r) << '\n';
    return os.str();
}

std::vector<SummaryRow> summarize(const std::vector<RunResult>& rows, SweepAxis axis) {
    auto point_of = [axis](const RunResult& r) {
        switch (axis) {
            case SweepAxis::Load: return static_cast<double>(r.load_packets);
            case SweepAxis::NetworkSize: return static_cast<double>(r.n_nodes);
            case SweepAxis::MaliciousFraction: return r.pct_malicious / 100.0;
        }
        return 0.0;
    };

    std::map<std::pair<std::string, double>, std::vector<const RunResult*>> groups;
    for (const auto& r : rows) groups[{r.protocol, point_of(r)}].push_back(&r);

    std::vector<SummaryRow> out;
    for (const auto& [key, members] : groups) {
        if (members.size() < 2)
            throw std::runtime_error("summarize: at least two seeds per point required");
        auto stats = [&](auto getter) {
            double mean = 0.0;
            for (const auto* m : members) mean += getter(*m);
            mean /= static_cast<double>(members.size());
            double var = 0.0;
            for (const auto* m : members) {
                const double d = getter(*m) - mean;
                var += d * d;
            }
            var /= static_cast<double>(members.size() - 1);
            const double ci =
                1.96 * std::sqrt(var / static_cast<double>(members.size()));
            return std::pair<double, double>(mean, ci);
        };
        SummaryRow s;
        s.protocol = key.first;
        s.point = key.second;
        s.n_seeds = static_cast<int>(members.size());
        std::tie(s.pdr_mean, s.pdr_ci) = stats([](const RunResult& r) { return r.pdr; });
        std::tie(s.delay_mean, s.delay_ci) =
            stats([](const RunResult& r) { return r.mean_delay_s; });
        std::tie(s.energy_mean, s.energy_ci) =
            stats([](const RunResult& r) { return r.energy_total_mwh; });
        out.push_back(s);
    }
    std::sort(out.begin(), out.end(), [](const SummaryRow& a, const SummaryRow& b) {
        if (a.protocol != b.protocol) return a.protocol < b.protocol;
        return a.point < b.point;
    });
    return out;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream os;
    os << "protocol,point,n_seeds,pdr_mean,pdr_ci95,mean_delay_s_mean,mean_delay_s_ci95,"
          "energy_total_mwh_mean,energy_total_mwh_ci95\n";
    for (const auto& r : rows) {
        os << r.protocol << ',' << fmt(r.point, 4) << ',' << r.n_seeds << ','
           << fmt(r.pdr_mean, 6) << ',' << fmt(r.pdr_ci, 6) << ','
           << fmt(r.delay_mean, 6) << ',' << fmt(r.delay_ci, 6) << ','
           << fmt(r.energy_mean, 9) << ',' << fmt(r.energy_ci, 9) << '\n';
    }
    return os.str();
}

}  // namespace wsnsim
