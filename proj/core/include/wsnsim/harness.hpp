#pragma once

#include <string>
#include <vector>

#include "wsnsim/metrics.hpp"
#include "wsnsim/scenario.hpp"

// Run orchestration: deployment realization, single-run execution with the
// energy-conservation cross-check, sweep fan-out, CSV emission and the
// mean/confidence-interval summary.

namespace wsnsim {

struct Deployment {
    std::vector<NodeState> nodes;           // index 0 is the base station
    std::vector<SourcePlanEntry> sources;
    std::vector<NodeId> malicious;
};

// Realizes a scenario: node placement, attack injection and traffic plan,
// each from its own seed substream so paired runs share what they should.
Deployment deploy(const Scenario& sc);

struct RunResult {
    std::string protocol;
    std::uint64_t seed = 0;
    int n_nodes = 0;
    int n_clusters = 0;
    double pct_malicious = 0.0;
    int load_packets = 0;
    int payload_bytes = 0;
    double pdr = 0.0;
    double mean_delay_s = 0.0;
    double energy_total_mwh = 0.0;
    double energy_per_node_mwh = 0.0;
    double first_node_death_s = -1.0;
    bool detection_triggered = false;
    double detection_latency_s = -1.0;
    int true_positives = 0;
    int false_positives = 0;
    std::string status = "ok";
};

// One full simulation. Never throws: failures come back in `status`.
// `trace_path`, when non-empty, receives the line-oriented event log.
RunResult run_one(const Scenario& sc, const std::string& trace_path = "");

enum class SweepAxis { Load, NetworkSize, MaliciousFraction };

struct SweepSpec {
    SweepAxis axis = SweepAxis::Load;
    std::vector<double> points;  // strictly increasing
    int seeds_per_point = 1;
    std::vector<ProtocolKind> protocols{ProtocolKind::Esrpsdc, ProtocolKind::Leach,
                                        ProtocolKind::Pegasis};

    void validate() const;
};

// Runs every (protocol, point, seed) combination; rows come back in that
// deterministic order regardless of how many workers executed them.
std::vector<RunResult> run_sweep(const SweepSpec& spec, const Scenario& base,
                                 int jobs = 1);

// Exact column set required of every result file.
extern const char* const kCsvHeader;

std::string to_csv_row(const RunResult& r);
std::string to_csv(const std::vector<RunResult>& rows);

struct SummaryRow {
    std::string protocol;
    double point = 0.0;
    int n_seeds = 0;
    double pdr_mean = 0.0, pdr_ci = 0.0;
    double delay_mean = 0.0, delay_ci = 0.0;
    double energy_mean = 0.0, energy_ci = 0.0;
};

// Per-(protocol, point) means with normal-approximation 95% half-widths.
// Requires at least two seeds per point.
std::vector<SummaryRow> summarize(const std::vector<RunResult>& rows, SweepAxis axis);

std::string summary_to_csv(const std::vector<SummaryRow>& rows);

}  // namespace wsnsim
