#pragma once

#include <optional>
#include <vector>

#include "wsnsim/core.hpp"

// Link-budget physics: two-ray ground-reflection path loss, SNR and
// reception decisions against the propagation limit, and the first-order
// radio energy model for transmit/receive/aggregation costs.

namespace wsnsim {

struct RadioConfig {
    // Discrete transmit power levels, strictly increasing. Level i (1-based)
    // is also the power of the base station's level-i beacon.
    std::vector<double> tx_power_dbm{-15.0, -5.0, 2.0, 8.0};
    double antenna_gain_tx = 1.0;
    double antenna_gain_rx = 1.0;
    double antenna_height_m = 1.5;
    double noise_floor_dbm = -111.0;
    double rx_threshold_dbm = -111.0;  // propagation limit
    double bandwidth_bps = 20000.0;    // channel bandwidth, governs serialization
    double margin_db = 3.0;            // headroom for minimal-power selection
    // Short-range setting for cluster-local control traffic. Full-field
    // broadcasts under a d^4 amplifier would drain a node in one shot.
    double control_power_dbm = -26.0;

    void validate() const;
    double max_power_dbm() const { return tx_power_dbm.back(); }
    double min_power_dbm() const { return tx_power_dbm.front(); }
    int level_count() const { return static_cast<int>(tx_power_dbm.size()); }
};

struct EnergyModel {
    double e_elec_j_per_bit = 50e-9;
    double eps_fs_j_per_bit_m2 = 10e-12;
    double eps_mp_j_per_bit_m4 = 0.0013e-12;
    double crossover_d_m = 0.0;  // 0 = derive sqrt(eps_fs/eps_mp)
    double e_aggregate_j_per_bit = 5e-9;

    double crossover() const;
    void validate() const;
};

struct LinkBudget {
    double rx_power_dbm = 0.0;
    double snr_db = 0.0;
    bool receivable = false;
};

// Pr(dBm) = Pt(dBm) + 10*log10(Gt*Gr*ht^2*hr^2 / d^4)
double two_ray_rx_power(double tx_power_dbm, double d_m, const RadioConfig& cfg);

LinkBudget link_budget(double tx_power_dbm, double d_m, const RadioConfig& cfg);

// Link budget between two deployed nodes at the given power.
LinkBudget snr(const NodeState& tx, const NodeState& rx, double tx_power_dbm,
               const RadioConfig& cfg);

// Largest distance at which a frame sent at tx_power_dbm still meets the
// reception threshold (two-ray inverse).
double max_range_m(double tx_power_dbm, const RadioConfig& cfg);

// One contiguous band per configured power level: band i's upper limit is
// the reach of the level-i beacon, band 1 starts at 0.
std::vector<LevelBand> derive_level_bands(const RadioConfig& cfg);

// First-order radio model.
//   tx: E = e_elec*bits + eps_fs*bits*d^2   (d < crossover)
//       E = e_elec*bits + eps_mp*bits*d^4   (otherwise)
//   rx: E = e_elec*bits
double tx_energy(int bits, double d_m, const EnergyModel& em);
double rx_energy(int bits, const EnergyModel& em);
double aggregation_energy(int bits, const EnergyModel& em);

// Smallest configured power level that closes the link implied by a received
// advertisement (path loss = advert power - RSSI) with margin to spare.
// Empty when even the maximum level falls short.
std::optional<double> min_tx_power_for(double rssi_of_advert_dbm,
                                       double advert_tx_power_dbm,
                                       const RadioConfig& cfg);

}  // namespace wsnsim
