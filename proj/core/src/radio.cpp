#include "wsnsim/radio.hpp"

#include <cmath>
#include <stdexcept>

namespace wsnsim {

void RadioConfig::validate() const {
    if (tx_power_dbm.empty())
        throw std::invalid_argument("radio: at least one tx power level required");
    for (std::size_t i = 1; i < tx_power_dbm.size(); ++i)
        if (tx_power_dbm[i] <= tx_power_dbm[i - 1])
            throw std::invalid_argument("radio: tx power levels must be strictly increasing");
    if (noise_floor_dbm > rx_threshold_dbm)
        throw std::invalid_argument("radio: noise floor must not exceed rx threshold");
    if (bandwidth_bps <= 0.0) throw std::invalid_argument("radio: bandwidth must be positive");
    if (antenna_height_m <= 0.0 || antenna_gain_tx <= 0.0 || antenna_gain_rx <= 0.0)
        throw std::invalid_argument("radio: antenna parameters must be positive");
    if (margin_db < 0.0) throw std::invalid_argument("radio: margin must be non-negative");
    if (control_power_dbm > tx_power_dbm.back())
        throw std::invalid_argument("radio: control power must not exceed the top level");
}

double EnergyModel::crossover() const {
    if (crossover_d_m > 0.0) return crossover_d_m;
    return std::sqrt(eps_fs_j_per_bit_m2 / eps_mp_j_per_bit_m4);
}

void EnergyModel::validate() const {
    if (e_elec_j_per_bit <= 0.0 || eps_fs_j_per_bit_m2 <= 0.0 ||
        eps_mp_j_per_bit_m4 <= 0.0 || e_aggregate_j_per_bit <= 0.0)
        throw std::invalid_argument("energy: all coefficients must be positive");
}

namespace {

double antenna_term_db(const RadioConfig& cfg) {
    const double h2 = cfg.antenna_height_m * cfg.antenna_height_m;
    return 10.0 * std::log10(cfg.antenna_gain_tx * cfg.antenna_gain_rx * h2 * h2);
}

}  // namespace

double two_ray_rx_power(double tx_power_dbm, double d_m, const RadioConfig& cfg) {
    if (d_m <= 0.0) throw std::invalid_argument("two_ray_rx_power: distance must be positive");
    return tx_power_dbm + antenna_term_db(cfg) - 40.0 * std::log10(d_m);
}

LinkBudget link_budget(double tx_power_dbm, double d_m, const RadioConfig& cfg) {
    LinkBudget lb;
    lb.rx_power_dbm = two_ray_rx_power(tx_power_dbm, d_m, cfg);
    lb.snr_db = lb.rx_power_dbm - cfg.noise_floor_dbm;
    lb.receivable = lb.rx_power_dbm >= cfg.rx_threshold_dbm;
    return lb;
}

LinkBudget snr(const NodeState& tx, const NodeState& rx, double tx_power_dbm,
               const RadioConfig& cfg) {
    const double d = distance(tx.pos, rx.pos);
    if (d <= 0.0) throw std::invalid_argument("snr: coincident nodes");
    return link_budget(tx_power_dbm, d, cfg);
}

double max_range_m(double tx_power_dbm, const RadioConfig& cfg) {
    // Invert Pr = Pt + A - 40*log10(d) at Pr = threshold.
    const double exponent =
        (tx_power_dbm + antenna_term_db(cfg) - cfg.rx_threshold_dbm) / 40.0;
    return std::pow(10.0, exponent);
}

std::vector<LevelBand> derive_level_bands(const RadioConfig& cfg) {
    cfg.validate();
    std::vector<LevelBand> bands;
    double lower = 0.0;
    for (std::size_t i = 0; i < cfg.tx_power_dbm.size(); ++i) {
        LevelBand b;
        b.level = static_cast<int>(i + 1);
        b.lower_m = lower;
        b.upper_m = max_range_m(cfg.tx_power_dbm[i], cfg);
        if (b.upper_m <= b.lower_m)
            throw std::invalid_argument("radio: power levels produce degenerate bands");
        bands.push_back(b);
        lower = b.upper_m;
    }
    return bands;
}

double tx_energy(int bits, double d_m, const EnergyModel& em) {
    if (bits <= 0) throw std::invalid_argument("tx_energy: bits must be positive");
    if (d_m < 0.0) throw std::invalid_argument("tx_energy: negative distance");
    const double amp = d_m < em.crossover()
                           ? em.eps_fs_j_per_bit_m2 * d_m * d_m
                           : em.eps_mp_j_per_bit_m4 * d_m * d_m * d_m * d_m;
    return em.e_elec_j_per_bit * bits + amp * bits;
}

double rx_energy(int bits, const EnergyModel& em) {
    if (bits <= 0) throw std::invalid_argument("rx_energy: bits must be positive");
    return em.e_elec_j_per_bit * bits;
}

double aggregation_energy(int bits, const EnergyModel& em) {
    if (bits <= 0) return 0.0;
    return em.e_aggregate_j_per_bit * bits;
}

std::optional<double> min_tx_power_for(double rssi_of_advert_dbm,
                                       double advert_tx_power_dbm,
                                       const RadioConfig& cfg) {
    const double path_loss_db = advert_tx_power_dbm - rssi_of_advert_dbm;
    const double required = cfg.rx_threshold_dbm + cfg.margin_db + path_loss_db;
    for (double level : cfg.tx_power_dbm)
        if (level >= required) return level;
    return std::nullopt;
}

}  // namespace wsnsim
