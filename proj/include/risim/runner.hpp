// runner.hpp — experiment execution and result emission

#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "risim/config.hpp"

namespace risim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitToleranceFailure = 2;

struct RunResult {
    int exit_code = kExitOk;
    std::string csv;           // header + rows, deterministic for a given config
    nlohmann::json summary;    // experiment-specific aggregates (sup errors, ratios, ...)
    std::vector<std::string> failures; // tolerance violations in oracle experiments
};

// Runs the configured experiment in memory. Library errors propagate as exceptions.
RunResult execute(const ExperimentConfig& cfg, int jobs);

// Sidecar contents: config echo, versions, wall time, outcome.
nlohmann::json make_metadata(const ExperimentConfig& cfg, const RunResult& result, double wall_seconds);

// Executes and writes `out_path` plus `out_path + ".meta.json"`. Returns the exit code.
int run_to_files(const ExperimentConfig& cfg, const std::string& out_path, int jobs);

// "%.17g"; throws Error on NaN or infinity.
std::string format_number(double x);

} // namespace risim
