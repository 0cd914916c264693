// config.hpp — experiment configuration (JSON) for the ris runner

#pragma once

#include "json.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "risim/dynamics.hpp"
#include "risim/spin_model.hpp"

namespace risim {

inline constexpr const char* kVersion = "0.1.0";

// Default cap on n_S * n_E; the RIS_MAX_DIM environment variable overrides it.
inline constexpr int kDefaultDimCap = 8;

enum class Experiment { effective, converge_lambda, converge_tau, asymptotic, kato, dyson_check, spin_oracle };

const char* experiment_name(Experiment e);
std::optional<Experiment> parse_experiment_name(const std::string& name);
const std::vector<std::string>& experiment_names();

struct Tolerances {
    double oracle = 1e-9;     // closed form vs pipeline
    double quadrature = 1e-6; // block exponential vs nested quadrature
    double structure = 1e-8;  // commutation / idempotence residuals
    double sub_projection = 1e-6;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::spin_oracle;
    std::optional<SpinParams> spin; // set for the spin shorthand
    std::optional<RISModel> model;

    double tau = 1.0;
    std::vector<double> lambdas;
    std::vector<std::pair<double, double>> pairs; // (lambda, tau)
    std::vector<double> eps;
    std::vector<double> t_samples;
    std::vector<double> times;
    std::vector<int> orders;
    double s_max = 5.0;
    int s_steps = 50;
    bool interpolated = false;
    std::string regime = "both";
    int quadrature_nodes = 32;
    std::optional<double> branch_cut_angle;
    Tolerances tolerances;
    std::string output;
    int jobs = 1;

    // Normalized configuration with every default filled in.
    nlohmann::json echo;
};

// Dimension cap from RIS_MAX_DIM (bounded by kMaxFullDim), else kDefaultDimCap.
int dimension_cap();

// Throws ConfigError naming the offending JSON path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config(const nlohmann::json& doc);

// [re, im] arrays (plain numbers accepted as real).
nlohmann::json complex_to_json(Complex z);
nlohmann::json matrix_to_json(const ComplexMatrix& m);

} // namespace risim
