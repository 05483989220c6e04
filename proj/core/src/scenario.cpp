#include "wsnsim/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wsnsim {

const char* protocol_name(ProtocolKind p) {
    switch (p) {
        case ProtocolKind::Esrpsdc: return "esrpsdc";
        case ProtocolKind::Leach: return "leach";
        case ProtocolKind::Pegasis: return "pegasis";
    }
    return "?";
}

void Scenario::validate() const {
    if (field_m <= 0.0) throw std::runtime_error("scenario: field_m must be positive");
    if (n_nodes < 1) throw std::runtime_error("scenario: n_nodes must be at least 1");
    if (n_clusters < 1) throw std::runtime_error("scenario: n_clusters must be at least 1");
    if (n_nodes < n_clusters)
        throw std::runtime_error("scenario: n_nodes must be at least n_clusters");
    if (sim_time_s <= 0.0) throw std::runtime_error("scenario: sim_time_s must be positive");
    if (init_energy_j <= 0.0)
        throw std::runtime_error("scenario: init_energy_j must be positive");
    if (payload_min_bytes <= 0 || payload_max_bytes < payload_min_bytes)
        throw std::runtime_error("scenario: payload range invalid");
    if (load_packets < 1) throw std::runtime_error("scenario: load_packets must be at least 1");
    if (send_interval_s <= 0.0)
        throw std::runtime_error("scenario: send_interval_s must be positive");
    if (round_period_s <= 0.0)
        throw std::runtime_error("scenario: round_period_s must be positive");
    if (leach_p <= 0.0 || leach_p >= 1.0)
        throw std::runtime_error("scenario: leach.p must lie in (0,1)");
    if (esrpsdc.m_bytes < 1) throw std::runtime_error("scenario: esrpsdc.m_bytes must be >= 1");
    if (esrpsdc.epoch_rounds < 1)
        throw std::runtime_error("scenario: esrpsdc.epoch_rounds must be >= 1");
    if (esrpsdc.abdicate_fraction <= 0.0 || esrpsdc.abdicate_fraction >= 1.0)
        throw std::runtime_error("scenario: esrpsdc.abdicate_fraction must lie in (0,1)");
    if (detect.window_rounds < 1)
        throw std::runtime_error("scenario: detect.window_rounds must be >= 1");
    if (detect.flag_fraction <= 0.0 || detect.flag_fraction > 1.0)
        throw std::runtime_error("scenario: detect.flag_fraction must lie in (0,1]");
    radio.validate();
    energy.validate();
    attack.validate();
    ThresholdParams t = esrpsdc.threshold;
    if (t.p <= 0.0 || t.p >= 1.0) throw std::runtime_error("scenario: esrpsdc.p must lie in (0,1)");
    if (t.c <= 0.0 || t.c > 1.0) throw std::runtime_error("scenario: esrpsdc.c must lie in (0,1]");
    if (t.k < 0.0 || t.k > 3.0) throw std::runtime_error("scenario: esrpsdc.k must lie in [0,3]");
}

namespace {

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::runtime_error("scenario: key '" + key + "' expects a number, got '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<int>(d);
    } catch (const std::exception&) {
        throw std::runtime_error("scenario: key '" + key + "' expects an integer, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long d = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::runtime_error("scenario: key '" + key + "' expects an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("scenario: key '" + key + "' expects true|false, got '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_double(key, item));
    if (out.empty())
        throw std::runtime_error("scenario: key '" + key + "' expects a comma list");
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void apply_key(Scenario& sc, const std::string& key, const std::string& value) {
    if (key == "protocol") {
        if (value == "esrpsdc") sc.protocol = ProtocolKind::Esrpsdc;
        else if (value == "leach") sc.protocol = ProtocolKind::Leach;
        else if (value == "pegasis") sc.protocol = ProtocolKind::Pegasis;
        else
            throw std::runtime_error("scenario: protocol '" + value +
                                     "' unknown (allowed: esrpsdc, leach, pegasis)");
    } else if (key == "layout") {
        if (value == "uniform") sc.layout = Layout::Uniform;
        else if (value == "source_sink_350m") sc.layout = Layout::SourceSink350m;
        else
            throw std::runtime_error("scenario: layout '" + value +
                                     "' unknown (allowed: uniform, source_sink_350m)");
    } else if (key == "seed") sc.seed = parse_u64(key, value);
    else if (key == "field_m") sc.field_m = parse_double(key, value);
    else if (key == "n_nodes") sc.n_nodes = parse_int(key, value);
    else if (key == "n_clusters") sc.n_clusters = parse_int(key, value);
    else if (key == "sim_time_s") sc.sim_time_s = parse_double(key, value);
    else if (key == "bs.x") sc.bs_pos.x = parse_double(key, value);
    else if (key == "bs.y") sc.bs_pos.y = parse_double(key, value);
    else if (key == "init_energy_j") sc.init_energy_j = parse_double(key, value);
    else if (key == "payload.min_bytes") sc.payload_min_bytes = parse_int(key, value);
    else if (key == "payload.max_bytes") sc.payload_max_bytes = parse_int(key, value);
    else if (key == "load_packets") sc.load_packets = parse_int(key, value);
    else if (key == "send_interval_s") sc.send_interval_s = parse_double(key, value);
    else if (key == "round_period_s") sc.round_period_s = parse_double(key, value);
    else if (key == "radio.tx_power_dbm") sc.radio.tx_power_dbm = parse_double_list(key, value);
    else if (key == "radio.antenna_gain_tx") sc.radio.antenna_gain_tx = parse_double(key, value);
    else if (key == "radio.antenna_gain_rx") sc.radio.antenna_gain_rx = parse_double(key, value);
    else if (key == "radio.antenna_height_m") sc.radio.antenna_height_m = parse_double(key, value);
    else if (key == "radio.noise_floor_dbm") sc.radio.noise_floor_dbm = parse_double(key, value);
    else if (key == "radio.rx_threshold_dbm") sc.radio.rx_threshold_dbm = parse_double(key, value);
    else if (key == "radio.bandwidth_bps") sc.radio.bandwidth_bps = parse_double(key, value);
    else if (key == "radio.margin_db") sc.radio.margin_db = parse_double(key, value);
    else if (key == "radio.control_power_dbm") sc.radio.control_power_dbm = parse_double(key, value);
    else if (key == "energy.e_elec_j_per_bit") sc.energy.e_elec_j_per_bit = parse_double(key, value);
    else if (key == "energy.eps_fs_j_per_bit_m2") sc.energy.eps_fs_j_per_bit_m2 = parse_double(key, value);
    else if (key == "energy.eps_mp_j_per_bit_m4") sc.energy.eps_mp_j_per_bit_m4 = parse_double(key, value);
    else if (key == "energy.crossover_d_m") sc.energy.crossover_d_m = parse_double(key, value);
    else if (key == "energy.e_aggregate_j_per_bit") sc.energy.e_aggregate_j_per_bit = parse_double(key, value);
    else if (key == "esrpsdc.p") sc.esrpsdc.threshold.p = parse_double(key, value);
    else if (key == "esrpsdc.c") sc.esrpsdc.threshold.c = parse_double(key, value);
    else if (key == "esrpsdc.k") sc.esrpsdc.threshold.k = parse_double(key, value);
    else if (key == "esrpsdc.m_bytes") sc.esrpsdc.m_bytes = parse_int(key, value);
    else if (key == "esrpsdc.epoch_rounds") sc.esrpsdc.epoch_rounds = parse_int(key, value);
    else if (key == "esrpsdc.abdicate_fraction") sc.esrpsdc.abdicate_fraction = parse_double(key, value);
    else if (key == "esrpsdc.forward_hold_s") sc.esrpsdc.forward_hold_s = parse_double(key, value);
    else if (key == "leach.p") sc.leach_p = parse_double(key, value);
    else if (key == "attack.fraction") sc.attack.fraction = parse_double(key, value);
    else if (key == "attack.single") sc.attack.single = parse_bool(key, value);
    else if (key == "attack.drop_prob") sc.attack.drop_prob = parse_double(key, value);
    else if (key == "attack.divert") sc.attack.divert = parse_bool(key, value);
    else if (key == "attack.false_advert") sc.attack.false_advert = parse_bool(key, value);
    else if (key == "attack.activation_s") sc.attack.activation_s = parse_double(key, value);
    else if (key == "attack.snr_bonus_db") sc.attack.snr_bonus_db = parse_double(key, value);
    else if (key == "attack.capacity") sc.attack.capacity = parse_int(key, value);
    else if (key == "detect.window_rounds") sc.detect.window_rounds = parse_int(key, value);
    else if (key == "detect.flag_fraction") sc.detect.flag_fraction = parse_double(key, value);
    else if (key == "detect.grace_s") sc.detect.grace_s = parse_double(key, value);
    else if (key == "engine.processing_delay_s") sc.processing_delay_s = parse_double(key, value);
    else if (key == "engine.jitter_max_s") sc.jitter_max_s = parse_double(key, value);
    else
        throw std::runtime_error("scenario: unknown key '" + key + "'");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    Scenario sc;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("scenario: parse error at line " +
                                     std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::runtime_error("scenario: parse error at line " +
                                     std::to_string(line_no) + ": empty key or value");
        apply_key(sc, key, value);
    }
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scenario: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

}  // namespace wsnsim
