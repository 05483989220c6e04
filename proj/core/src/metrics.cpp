#include "wsnsim/metrics.hpp"

#include <stdexcept>

namespace wsnsim {

void MetricsLedger::record_source_packet(std::uint64_t uid, NodeId origin,
                                         double created_s) {
    auto [it, inserted] = packets_.try_emplace(uid);
    if (!inserted) throw std::logic_error("metrics: duplicate source packet uid");
    it->second.origin = origin;
    it->second.created_s = created_s;
    ++n_transmitted_;
}

void MetricsLedger::record_transmitted(std::uint64_t uid, double t_s) {
    auto it = packets_.find(uid);
    if (it == packets_.end()) throw std::logic_error("metrics: unknown packet uid");
    if (it->second.transmitted_s < 0.0) it->second.transmitted_s = t_s;
}

void MetricsLedger::record_bs_delivery(const std::vector<SourceRecord>& sources,
                                       double t_s) {
    for (const auto& rec : sources) {
        auto it = packets_.find(rec.uid);
        if (it == packets_.end()) throw std::logic_error("metrics: unknown packet uid");
        if (it->second.delivered_s >= 0.0)
            throw std::logic_error("metrics: double credit for a source packet");
        it->second.delivered_s = t_s;
        ++n_received_;
        delay_samples_.push_back(t_s - it->second.created_s);
    }
}

double MetricsLedger::pdr_or_zero() const {
    return n_transmitted_ > 0 ? pdr(n_received_, n_transmitted_) : 0.0;
}

double MetricsLedger::mean_delay_s() const {
    if (delay_samples_.empty()) return 0.0;
    double sum = 0.0;
    for (double d : delay_samples_) sum += d;
    return sum / static_cast<double>(delay_samples_.size());
}

std::map<NodeId, double> MetricsLedger::window_delivery_ratio(double t0, double t1,
                                                              double now) const {
    std::map<NodeId, std::pair<int, int>> counts;  // origin -> (sent, delivered)
    for (const auto& [uid, rec] : packets_) {
        if (rec.transmitted_s < t0 || rec.transmitted_s >= t1) continue;
        auto& [sent, delivered] = counts[rec.origin];
        ++sent;
        if (rec.delivered_s >= 0.0 && rec.delivered_s <= now) ++delivered;
    }
    std::map<NodeId, double> ratios;
    for (const auto& [origin, sd] : counts)
        ratios[origin] = static_cast<double>(sd.second) / static_cast<double>(sd.first);
    return ratios;
}

std::vector<MetricsLedger::PacketFate> MetricsLedger::fates() const {
    std::vector<PacketFate> out;
    for (const auto& [uid, rec] : packets_)
        out.push_back(PacketFate{rec.origin, rec.created_s, rec.transmitted_s,
                                 rec.delivered_s});
    return out;
}

bool MetricsLedger::delivered(std::uint64_t uid) const {
    auto it = packets_.find(uid);
    return it != packets_.end() && it->second.delivered_s >= 0.0;
}

}  // namespace wsnsim
