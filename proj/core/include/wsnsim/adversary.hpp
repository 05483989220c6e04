#pragma once

#include <map>
#include <set>
#include <vector>

#include "wsnsim/core.hpp"
#include "wsnsim/engine.hpp"
#include "wsnsim/metrics.hpp"

// Sinkhole attack injection and the base-station side detection machinery:
// flagging starved sources, collecting flow responses over the flood tree,
// and locating intruders as roots of the affected region's routing pattern.

namespace wsnsim {

struct AttackConfig {
    double fraction = 0.0;   // share of nodes compromised at deployment
    bool single = false;     // exactly one intruder regardless of fraction
    bool false_advert = true;
    double drop_prob = 0.2;  // captured traffic destroyed with this probability
    bool divert = true;      // survivors bounced to a random node
    double activation_s = 0.0;
    double snr_bonus_db = 20.0;  // claimed link-quality edge in fake adverts
    // Victims a lure can hold at once while still passing for a normal
    // cluster neighbourhood. Unbounded acceptance would be conspicuous and
    // makes capture saturate at small fractions.
    int capacity = 4;

    bool enabled() const { return single || fraction > 0.0; }
    void validate() const;
};

// Picks the compromised set: floor(fraction*N) non-BS nodes uniformly at
// random, or exactly one in single mode. Draws nothing when the attack is
// disabled, so a fraction-0 run is bit-identical to an adversary-free one.
std::vector<NodeId> inject(std::vector<NodeState>& nodes, const AttackConfig& cfg,
                           Rng& rng);

// What a sinkhole does with a captured data frame.
enum class CaptureAction { Drop, Divert };
CaptureAction capture_action(const AttackConfig& cfg, Rng& rng);

// Uniform pick among alive non-BS nodes within range of the attacker, the
// destination of a diverted frame. Empty when nobody is in reach.
std::optional<NodeId> divert_target(const std::vector<NodeState>& nodes, NodeId self,
                                    double range_m, Rng& rng);

struct FlowResponse {
    NodeId responder = 0;
    NodeId next_hop = 0;
    int cost = 0;  // hop-count to the BS
};

// Sources whose delivery ratio over the window falls below
// flag_fraction * median across all reporting sources. A collapsed median
// (saturated attack) degrades to flagging every starved source.
std::set<NodeId> flag_affected(const std::map<NodeId, double>& ratios,
                               double flag_fraction);

// Roots of the routing pattern implied by the responses: any node that other
// flows point at but which has no outgoing edge inside the region. Cycles
// yield all of their members. The BS is never a suspect.
std::set<NodeId> locate_sinkhole(const std::vector<FlowResponse>& responses,
                                 const std::set<NodeId>& affected, NodeId bs_id);

}  // namespace wsnsim
