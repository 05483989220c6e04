#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "wsnsim/harness.hpp"

// wsnsim CLI: single runs and comparative sweeps over scenario files.
//
//   wsnsim run   --scenario s.scn [--seed N] [--protocol P] [--trace t.log] --out r.csv
//   wsnsim sweep --scenario s.scn --axis load|size|malicious --points a,b,c
//                --seeds N [--protocols p1,p2] [--jobs J] --out r.csv

namespace {

std::vector<double> parse_points(const std::string& csv) {
    std::vector<double> points;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        points.push_back(std::stod(item));
    }
    return points;
}

wsnsim::ProtocolKind parse_protocol(const std::string& name) {
    if (name == "esrpsdc") return wsnsim::ProtocolKind::Esrpsdc;
    if (name == "leach") return wsnsim::ProtocolKind::Leach;
    if (name == "pegasis") return wsnsim::ProtocolKind::Pegasis;
    throw CLI::ValidationError("protocol must be one of: esrpsdc, leach, pegasis");
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << content;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cluster-based WSN routing simulator"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "execute a single scenario");
    std::string run_scenario, run_trace, run_out, run_protocol;
    std::int64_t run_seed = -1;
    run->add_option("--scenario", run_scenario, "scenario file")->required();
    run->add_option("--seed", run_seed, "override the scenario seed");
    run->add_option("--protocol", run_protocol, "override the protocol");
    run->add_option("--trace", run_trace, "write an event trace to this path");
    run->add_option("--out", run_out, "result CSV path")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a comparative sweep");
    std::string sw_scenario, sw_axis, sw_points, sw_out, sw_protocols;
    int sw_seeds = 1;
    int sw_jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (sw_jobs < 1) sw_jobs = 1;
    sweep->add_option("--scenario", sw_scenario, "base scenario file")->required();
    sweep->add_option("--axis", sw_axis, "load | size | malicious")->required();
    sweep->add_option("--points", sw_points, "comma-separated sweep points")->required();
    sweep->add_option("--seeds", sw_seeds, "seeds per point")->required();
    sweep->add_option("--protocols", sw_protocols,
                      "comma-separated subset (default: all three)");
    sweep->add_option("--jobs", sw_jobs, "parallel workers");
    sweep->add_option("--out", sw_out, "result CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            wsnsim::Scenario sc = wsnsim::load_scenario(run_scenario);
            if (run_seed >= 0) sc.seed = static_cast<std::uint64_t>(run_seed);
            if (!run_protocol.empty()) sc.protocol = parse_protocol(run_protocol);
            const wsnsim::RunResult r = wsnsim::run_one(sc, run_trace);
            std::ostringstream os;
            os << wsnsim::kCsvHeader << '\n' << wsnsim::to_csv_row(r) << '\n';
            write_file(run_out, os.str());
            if (r.status != "ok") {
                std::cerr << "run finished with status: " << r.status << '\n';
                return 2;
            }
            return 0;
        }

        wsnsim::Scenario base = wsnsim::load_scenario(sw_scenario);
        wsnsim::SweepSpec spec;
        if (sw_axis == "load") spec.axis = wsnsim::SweepAxis::Load;
        else if (sw_axis == "size") spec.axis = wsnsim::SweepAxis::NetworkSize;
        else if (sw_axis == "malicious") spec.axis = wsnsim::SweepAxis::MaliciousFraction;
        else throw std::runtime_error("axis must be load, size or malicious");
        spec.points = parse_points(sw_points);
        spec.seeds_per_point = sw_seeds;
        if (!sw_protocols.empty()) {
            spec.protocols.clear();
            std::stringstream ss(sw_protocols);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) spec.protocols.push_back(parse_protocol(item));
        }
        const auto rows = wsnsim::run_sweep(spec, base, sw_jobs);
        write_file(sw_out, wsnsim::to_csv(rows));
        for (const auto& r : rows)
            if (r.status != "ok") {
                std::cerr << "some runs failed; see the status column\n";
                return 2;
            }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
