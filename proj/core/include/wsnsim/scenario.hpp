#pragma once

#include <cstdint>
#include <string>

#include "wsnsim/adversary.hpp"
#include "wsnsim/core.hpp"
#include "wsnsim/radio.hpp"

// Scenario file loading: line-oriented `key = value` text with `#` comments
// and dotted keys. Every default comes from the standard parameter table;
// unknown keys are rejected.

namespace wsnsim {

enum class ProtocolKind { Esrpsdc, Leach, Pegasis };

const char* protocol_name(ProtocolKind p);

enum class Layout { Uniform, SourceSink350m };

struct EsrpsdcParams {
    ThresholdParams threshold{};   // P, C, K
    int m_bytes = 1;               // member-id suffix width
    int epoch_rounds = 10;         // data rounds between re-elections
    double abdicate_fraction = 0.5;
    double forward_hold_s = 0.8;   // inter-level cascade stagger
};

struct DetectParams {
    int window_rounds = 2;
    double flag_fraction = 0.5;
    double grace_s = 6.0;  // in-flight allowance at window boundaries
};

// One planned source packet: origin, send time, drawn payload size.
struct SourcePlanEntry {
    std::uint64_t uid = 0;
    NodeId origin = 0;
    double at_s = 0.0;
    int payload_bytes = 0;
};

struct Scenario {
    ProtocolKind protocol = ProtocolKind::Esrpsdc;
    std::uint64_t seed = 1;
    double field_m = 1000.0;
    int n_nodes = 500;
    int n_clusters = 20;
    double sim_time_s = 600.0;
    Position bs_pos{50.0, 75.0};
    double init_energy_j = 0.5;
    int payload_min_bytes = 30;
    int payload_max_bytes = 70;
    int load_packets = 200;
    double send_interval_s = 60.0;
    double round_period_s = 5.0;
    Layout layout = Layout::Uniform;

    RadioConfig radio{};
    EnergyModel energy{};
    EsrpsdcParams esrpsdc{};
    double leach_p = 0.05;
    AttackConfig attack{};
    DetectParams detect{};

    double processing_delay_s = 1e-3;
    double jitter_max_s = 10e-3;

    void validate() const;
};

// Parses a scenario file. Throws std::runtime_error with the offending line
// number on parse errors and the offending key on validation errors.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);

}  // namespace wsnsim
