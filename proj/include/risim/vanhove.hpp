// vanhove.hpp — effective van Hove generators and convergence sweeps

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "risim/dynamics.hpp"
#include "risim/linalg.hpp"

namespace risim {

enum class Regime { weak_coupling, fast_repetition };

const char* regime_name(Regime r);

struct EffectiveGenerator {
    Regime regime;
    Superoperator generator;
    SpectralDecomposition averaging_basis;
    std::optional<double> branch_cut_angle; // weak coupling only
};

// sum_k P_k b P_k over the projections of basis.
Superoperator spectral_average(const Superoperator& b, const SpectralDecomposition& basis);

// Branch logarithm A0 of alpha_S^tau. tau = 0 gives 0.
Superoperator log_generator_A0(const RISModel& model, double tau,
                               std::optional<double> branch_cut_angle = std::nullopt);

// E_S phi_{SE,2}^tau restricted to M_S.
Superoperator second_order_term(const RISModel& model, double tau);

// -(E_S phi_{SE,2}^tau) averaged over the spectral projections of A0.
EffectiveGenerator effective_generator_weak_coupling(const RISModel& model, double tau,
                                                     std::optional<double> branch_cut_angle = std::nullopt);

// -1/2 (E_S [v,.]^2) averaged over the spectral projections of delta_S.
EffectiveGenerator effective_generator_fast_repetition(const RISModel& model);

struct ConvergenceRow {
    double parameter;
    double s;
    double error;
};

struct DecayRatio {
    double from; // parameter p
    double to;   // next parameter in the sweep
    double ratio; // sup_error(p) / sup_error(next)
};

struct ConvergenceReport {
    Regime regime;
    std::vector<ConvergenceRow> rows; // sorted by (parameter, s)
    std::vector<std::pair<double, double>> sup_errors; // (parameter, sup over s), sweep order
    std::vector<DecayRatio> decay_ratios;
};

struct SweepGrid {
    double s_max = 5.0;
    int s_steps = 50; // s_k = s_max k / (s_steps - 1)
};

inline constexpr double kMaxLatticeIterations = 1e7;

// || T^n alpha_S^{-tau n} - e^{s G} || with n = floor(s / (lambda^2 tau)).
ConvergenceReport converge_lambda(const RISModel& model, double tau, const std::vector<double>& lambdas,
                                  const SweepGrid& grid, int jobs = 1);

// || phi_res^{t} alpha_S^{-t} - e^{s G} || with t = s / lambda^2.
ConvergenceReport converge_lambda_interpolated(const RISModel& model, double tau,
                                               const std::vector<double>& lambdas, const SweepGrid& grid,
                                               int jobs = 1);

// || phi_res^{t} alpha_S^{-t} - e^{s G_fast} || with t = s / (lambda^2 tau) for each (lambda, tau).
// The row parameter is tau.
ConvergenceReport converge_tau(const RISModel& model, const std::vector<std::pair<double, double>>& pairs,
                               const SweepGrid& grid, int jobs = 1);

} // namespace risim
