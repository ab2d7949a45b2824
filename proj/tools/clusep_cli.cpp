// clusep: run cluster-separability and measurement-model experiments from a
// JSON configuration.
//
//   clusep run   --config PATH --out PATH [--format json|csv] [--seed INT]
//   clusep sweep --config PATH --param NAME --values V1,V2,... --out PATH [--seed INT]
//
// Exit status: 0 success, 2 invalid input or configuration, 3 numerical
// degeneracy (e.g. a fermionic state annihilated by antisymmetrization).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clusep/experiment.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitDegenerate = 3;

nlohmann::json load_config(const std::string& path, std::optional<std::uint64_t> seed) {
    std::ifstream in(path);
    if (!in) throw clusep::ValidationError("cannot read config file '" + path + "'");
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw clusep::ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (seed) cfg["seed"] = *seed;
    return cfg;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw clusep::ValidationError("cannot write output file '" + path + "'");
    out << text;
}

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw clusep::ValidationError("sweep value '" + item + "' is not a number");
        out.push_back(v);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cluster separability and measurement-model experiments"};
    app.require_subcommand(1);

    std::string config, out, format = "json", param, values;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "Run one experiment and write its report");
    run->add_option("--config", config, "Experiment configuration (JSON)")->required();
    run->add_option("--out", out, "Report path")->required();
    run->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    run->add_option("--seed", seed, "Override the configuration seed");

    auto* sweep = app.add_subcommand("sweep", "Run an experiment once per parameter value and write CSV rows");
    sweep->add_option("--config", config, "Experiment configuration (JSON)")->required();
    sweep->add_option("--param", param, "Dotted path of a numeric configuration field")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();
    sweep->add_option("--out", out, "CSV path")->required();
    sweep->add_option("--seed", seed, "Override the configuration seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        const auto cfg = load_config(config, seed);
        if (run->parsed()) {
            const auto report = clusep::experiment::with_timestamp(clusep::experiment::run(cfg));
            write_file(out, format == "csv" ? clusep::experiment::report_csv(report) : report.dump(2) + "\n");
        } else {
            write_file(out, clusep::experiment::sweep(cfg, param, parse_values(values)));
        }
    } catch (const clusep::DegenerateError& e) {
        std::cerr << "clusep: degenerate: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const clusep::ValidationError& e) {
        std::cerr << "clusep: invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "clusep: invalid input: " << e.what() << '\n';
        return kExitInvalid;
    }
    return 0;
}
