// ris_main.cpp — command-line entry point: ris <experiment> --config <path> [--out <path>] [--jobs N]

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "risim/config.hpp"
#include "risim/errors.hpp"
#include "risim/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw risim::Error("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Repeated-interaction simulator: exact dynamics, van Hove limits and asymptotic states"};
    app.set_version_flag("--version", std::string(risim::kVersion));
    app.require_subcommand(1);

    std::string config_path, out_path;
    int jobs = 0;
    for (const auto& name : risim::experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_path, "results CSV (metadata goes to <out>.meta.json)");
        sub->add_option("--jobs", jobs, "parallel workers (overrides the config)")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? risim::kExitOk : risim::kExitError;
    }

    const std::string experiment = app.get_subcommands().front()->get_name();
    try {
        const risim::ExperimentConfig cfg = risim::parse_config(read_file(config_path));
        if (experiment != risim::experiment_name(cfg.experiment)) {
            throw risim::ConfigError("$.experiment", std::string("config is for '") +
                                                         risim::experiment_name(cfg.experiment) +
                                                         "' but the command is '" + experiment + "'");
        }
        const std::string out = out_path.empty() ? cfg.output : out_path;
        const int code = risim::run_to_files(cfg, out, jobs > 0 ? jobs : cfg.jobs);
        if (code == risim::kExitToleranceFailure) {
            std::cerr << "ris: tolerance failure (see " << out << ".meta.json)\n";
        }
        return code;
    } catch (const std::exception& e) {
        std::cerr << "ris: error: " << e.what() << '\n';
        return risim::kExitError;
    }
}
