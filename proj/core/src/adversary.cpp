#include "wsnsim/adversary.hpp"

#include <algorithm>
#include <stdexcept>

namespace wsnsim {

void AttackConfig::validate() const {
    if (fraction < 0.0 || fraction >= 1.0)
        throw std::invalid_argument("attack: fraction must lie in [0,1)");
    if (drop_prob < 0.0 || drop_prob > 1.0)
        throw std::invalid_argument("attack: drop_prob must lie in [0,1]");
    if (activation_s < 0.0)
        throw std::invalid_argument("attack: activation_s must be non-negative");
    if (capacity < 1) throw std::invalid_argument("attack: capacity must be >= 1");
    if (enabled() && !false_advert && drop_prob == 0.0 && !divert)
        throw std::invalid_argument("attack: an active attack needs at least one behavior flag");
}

std::vector<NodeId> inject(std::vector<NodeState>& nodes, const AttackConfig& cfg,
                           Rng& rng) {
    cfg.validate();
    if (!cfg.enabled()) return {};

    std::vector<NodeId> pool;
    for (const auto& n : nodes)
        if (n.role != Role::BaseStation) pool.push_back(n.id);

    std::size_t count =
        cfg.single ? 1
                   : static_cast<std::size_t>(cfg.fraction * static_cast<double>(pool.size()));
    count = std::min(count, pool.size());

    std::vector<NodeId> picked;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.index(pool.size() - i);
        std::swap(pool[i], pool[j]);
        picked.push_back(pool[i]);
    }
    std::sort(picked.begin(), picked.end());
    for (NodeId id : picked) nodes.at(id).malicious = true;
    return picked;
}

CaptureAction capture_action(const AttackConfig& cfg, Rng& rng) {
    // A captured frame never progresses toward the BS: it is destroyed, or
    // bounced to a random node when the divert behavior is on.
    if (rng.uniform() < cfg.drop_prob) return CaptureAction::Drop;
    return cfg.divert ? CaptureAction::Divert : CaptureAction::Drop;
}

std::optional<NodeId> divert_target(const std::vector<NodeState>& nodes, NodeId self,
                                    double range_m, Rng& rng) {
    std::vector<NodeId> candidates;
    const Position& at = nodes.at(self).pos;
    for (const auto& n : nodes) {
        if (n.id == self || n.role == Role::BaseStation || !n.alive()) continue;
        if (distance(n.pos, at) <= range_m) candidates.push_back(n.id);
    }
    if (candidates.empty()) return std::nullopt;
    return candidates[rng.index(candidates.size())];
}

std::set<NodeId> flag_affected(const std::map<NodeId, double>& ratios,
                               double flag_fraction) {
    std::set<NodeId> flagged;
    if (ratios.empty()) return flagged;

    std::vector<double> values;
    values.reserve(ratios.size());
    for (const auto& [id, r] : ratios) values.push_back(r);
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const double median = n % 2 == 1
                              ? values[n / 2]
                              : 0.5 * (values[n / 2 - 1] + values[n / 2]);

    if (median > 0.0) {
        const double cut = flag_fraction * median;
        for (const auto& [id, r] : ratios)
            if (r < cut) flagged.insert(id);
    } else {
        // Saturated attack: the median itself collapsed, flag every starved
        // source rather than nobody.
        for (const auto& [id, r] : ratios)
            if (r == 0.0) flagged.insert(id);
    }
    return flagged;
}

std::set<NodeId> locate_sinkhole(const std::vector<FlowResponse>& responses,
                                 const std::set<NodeId>& affected, NodeId bs_id) {
    std::set<NodeId> suspects;
    if (responses.empty()) return suspects;

    std::map<NodeId, NodeId> out;
    std::map<NodeId, std::vector<NodeId>> in;
    for (const auto& r : responses) {
        if (r.responder == r.next_hop)
            throw std::invalid_argument("locate_sinkhole: self-loop response");
        out[r.responder] = r.next_hop;
        in[r.next_hop].push_back(r.responder);
    }

    // Root rule: a pointed-at node is a suspect when it stays silent or its
    // own claim exits the queried region.
    for (const auto& [target, srcs] : in) {
        if (target == bs_id) continue;
        auto it = out.find(target);
        const bool root = it == out.end() ||
                          (it->second != bs_id && !affected.count(it->second));
        if (root) suspects.insert(target);
    }

    // A suspect pointed at only by other suspects is the target of a lie,
    // not a sink of real flows.
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = suspects.begin(); it != suspects.end();) {
            const auto& srcs = in[*it];
            const bool only_lies =
                !srcs.empty() &&
                std::all_of(srcs.begin(), srcs.end(),
                            [&](NodeId s) { return suspects.count(s) > 0; });
            if (only_lies) {
                it = suspects.erase(it);
                changed = true;
            } else {
                ++it;
            }
        }
    }

    // Cycles never reach the BS nor a silent terminal; every member of a
    // terminal cycle is a suspect.
    for (const auto& [start, first_hop] : out) {
        std::vector<NodeId> path;
        std::map<NodeId, std::size_t> seen;
        NodeId cur = start;
        while (true) {
            if (cur == bs_id || suspects.count(cur)) break;
            auto it = out.find(cur);
            if (it == out.end()) break;  // silent terminal, handled above
            if (it->second != bs_id && !affected.count(it->second)) break;
            auto pos = seen.find(cur);
            if (pos != seen.end()) {
                for (std::size_t i = pos->second; i < path.size(); ++i)
                    suspects.insert(path[i]);
                break;
            }
            seen[cur] = path.size();
            path.push_back(cur);
            cur = it->second;
        }
    }
    suspects.erase(bs_id);
    return suspects;
}

}  // namespace wsnsim
