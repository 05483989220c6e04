#include "wsnsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wsnsim {

double distance(const Position& a, const Position& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

const char* role_name(Role r) {
    switch (r) {
        case Role::Member: return "member";
        case Role::ClusterHead: return "ch";
        case Role::NextClusterHead: return "next_ch";
        case Role::OneHopRelay: return "relay";
        case Role::TwoHopMember: return "two_hop";
        case Role::BaseStation: return "bs";
        case Role::Malicious: return "malicious";
    }
    return "?";
}

const char* packet_kind_name(PacketKind k) {
    switch (k) {
        case PacketKind::Req: return "req";
        case PacketKind::LevelBeacon: return "level_beacon";
        case PacketKind::Hello: return "hello";
        case PacketKind::ChAdvert: return "ch_advert";
        case PacketKind::JoinConfirm: return "join_confirm";
        case PacketKind::StateMsg: return "state";
        case PacketKind::Abdicate: return "abdicate";
        case PacketKind::TdmaSchedule: return "tdma";
        case PacketKind::Data: return "data";
        case PacketKind::Aggregate: return "aggregate";
        case PacketKind::DetectRequest: return "detect_req";
        case PacketKind::DetectResponse: return "detect_resp";
    }
    return "?";
}

int z_window_rounds(double p) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("ch_threshold: P must lie in (0,1)");
    return static_cast<int>(std::ceil(1.0 / p));
}

double ch_threshold(const NodeState& node, int round, const LevelBand& band,
                    const ThresholdParams& params, double d_bs_m) {
    if (band.upper_m <= band.lower_m)
        throw std::invalid_argument("ch_threshold: band upper limit must exceed lower limit");
    if (params.p <= 0.0 || params.p >= 1.0)
        throw std::invalid_argument("ch_threshold: P must lie in (0,1)");
    if (params.c <= 0.0 || params.c > 1.0)
        throw std::invalid_argument("ch_threshold: C must lie in (0,1]");
    if (params.k < 0.0 || params.k > 3.0)
        throw std::invalid_argument("ch_threshold: K must lie in [0,3]");
    if (round < 1) throw std::invalid_argument("ch_threshold: round starts at 1");

    if (node.energy_j <= 0.0) return 0.0;
    const int window = z_window_rounds(params.p);
    if (node.rounds_since_ch < window) return 0.0;  // outside Z

    // Level assignment clamps, so keep d inside the band before evaluating.
    const double d = std::clamp(d_bs_m, band.lower_m, band.upper_m);
    const double f_r = std::max(1, round % window);

    const double numerator = params.p * params.c * (band.upper_m - d);
    const double denominator =
        (1.0 - params.p) * f_r * (band.upper_m - band.lower_m);
    double energy_ratio = node.energy_init_j > 0.0
                              ? node.energy_j / node.energy_init_j
                              : 0.0;
    energy_ratio = std::clamp(energy_ratio, 0.0, 1.0);

    const double t = (numerator / denominator) * std::pow(energy_ratio, params.k);
    return std::clamp(t, 0.0, 1.0);
}

double pdr(std::int64_t n_received, std::int64_t n_transmitted) {
    if (n_transmitted <= 0) throw std::invalid_argument("pdr: undefined ratio, N_t = 0");
    if (n_received < 0 || n_received > n_transmitted)
        throw std::invalid_argument("pdr: N_r must lie in [0, N_t]");
    return static_cast<double>(n_received) / static_cast<double>(n_transmitted);
}

double joules_to_mwh(double e_j) {
    if (e_j < 0.0) throw std::invalid_argument("joules_to_mwh: negative energy");
    return e_j / 3.6;
}

}  // namespace wsnsim
