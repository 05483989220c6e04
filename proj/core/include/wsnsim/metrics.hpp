#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "wsnsim/core.hpp"

// Run-level bookkeeping: N_t / N_r counters with per-source provenance,
// per-packet latency samples, and intruder-detection outcomes. Fed by the
// protocols, read out by the harness.

namespace wsnsim {

struct DetectionStats {
    bool triggered = false;
    double first_trigger_s = -1.0;
    std::set<NodeId> suspects;  // union over all triggers
    int true_positives = 0;
    int false_positives = 0;
};

class MetricsLedger {
public:
    // Every source-originated data packet counts into N_t exactly once,
    // at generation time. Packets that never leave an orphaned node still
    // count against the delivery ratio.
    void record_source_packet(std::uint64_t uid, NodeId origin, double created_s);

    // The member actually put the packet on the air (detection windows only
    // reason about transmitted packets).
    void record_transmitted(std::uint64_t uid, double t_s);

    // An aggregate reached the base station; credit each distinct source
    // record once and take its delay sample.
    void record_bs_delivery(const std::vector<SourceRecord>& sources, double t_s);

    std::int64_t n_transmitted() const { return n_transmitted_; }
    std::int64_t n_received() const { return n_received_; }
    double pdr_or_zero() const;
    const std::vector<double>& delay_samples() const { return delay_samples_; }
    double mean_delay_s() const;

    // Per-origin delivery ratio over packets transmitted in [t0, t1), with
    // deliveries counted up to `now`. Origins with no transmissions in the
    // window are absent from the result.
    std::map<NodeId, double> window_delivery_ratio(double t0, double t1,
                                                   double now) const;

    bool delivered(std::uint64_t uid) const;

    // diagnostics: uid -> (origin, created, transmitted, delivered)
    struct PacketFate {
        NodeId origin;
        double created_s, transmitted_s, delivered_s;
    };
    std::vector<PacketFate> fates() const;

    DetectionStats detection;

private:
    struct PacketRecord {
        NodeId origin = 0;
        double created_s = 0.0;
        double transmitted_s = -1.0;
        double delivered_s = -1.0;
    };

    std::map<std::uint64_t, PacketRecord> packets_;
    std::int64_t n_transmitted_ = 0;
    std::int64_t n_received_ = 0;
    std::vector<double> delay_samples_;
};

}  // namespace wsnsim
