// asymptotics.hpp — peripheral spectra, limit projections and asymptotic states

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "risim/dynamics.hpp"
#include "risim/linalg.hpp"
#include "risim/vanhove.hpp"

namespace risim {

// Eigenvalues with |mu| >= 1 - tol, sorted by argument.
std::vector<Complex> peripheral_spectrum(const Superoperator& t_map, double tol = 1e-9);

struct LimitProjection {
    Superoperator projection;      // spectral projection of the eigenvalue 1
    bool converged = false;        // T^n -> projection
    int multiplicity = 0;          // algebraic multiplicity of the eigenvalue 1
    std::vector<double> residuals; // || T^{2^j} - P ||, j = 0, 1, ...
    double condition_number = 1.0; // of the eigenvector matrix
    std::vector<Complex> peripheral;
};

// Throws DefectError when T is not diagonalizable (in particular a Jordan block at 1).
LimitProjection limit_projection(const Superoperator& t_map, double tol = 1e-9,
                                 std::uint64_t max_power = std::uint64_t{1} << 20);

// For a rank-one projection P(x) = Tr(rho x) 1, the density rho.
ComplexMatrix state_of_projection(const Superoperator& p);

struct AsymptoticReport {
    std::vector<Complex> peripheral_eigenvalues;
    Superoperator limit_projection;
    bool is_rank_one = false;
    ComplexMatrix asymptotic_density;
    std::vector<std::pair<double, ComplexMatrix>> period_samples;
    // max over samples of the trace distance between the state at t and at t + tau
    double periodicity_residual = 0.0;
    double condition_number = 1.0;
};

// Throws NoAsymptoticStateError unless 1 is a simple eigenvalue of T(lambda, tau)
// and the only peripheral one. t_samples must lie in [0, tau).
AsymptoticReport asymptotic_periodic_state(const RISModel& model, double lambda, double tau,
                                           const std::vector<double>& t_samples = {0.0});

struct EffectiveState {
    ComplexMatrix state;    // a fixed state of exp(s G); the limit when rank_one
    bool rank_one = false;  // 0 simple and all other eigenvalues have Re < -tol
    std::vector<Complex> eigenvalues;
    double horizon_residual = 0.0; // || exp(horizon G) - P || when rank_one
};

EffectiveState effective_asymptotic_state(const EffectiveGenerator& gen, double tol = 1e-9,
                                          double horizon = 1e3);

struct OrderRow {
    double lambda;
    double distance;
};

struct OrderComparison {
    std::vector<OrderRow> rows;
    std::vector<double> ratios; // distance(lambda_i) / distance(lambda_{i+1})
    ComplexMatrix effective_state;
};

// Trace distance between the exact asymptotic state (t = 0) and the weak-coupling effective state.
OrderComparison compare_orders(const RISModel& model, double tau, const std::vector<double>& lambdas,
                               int jobs = 1);

struct KatoReport {
    Superoperator p0;      // eigenprojection of 1 for alpha_S^tau
    Superoperator t_prime; // dT/d(lambda^2) at 0
    Superoperator q;       // eigenprojection of 0 for p0 t' p0
    Superoperator p0q;
    Superoperator p0_plus; // extrapolated limit of P(eps)
    std::vector<double> eps;
    std::vector<double> distances;  // || P(eps) - P(0+) ||
    std::vector<double> differences; // || P(eps_i) - P(eps_{i+1}) ||
    std::vector<double> ratios;      // distances_i / distances_{i+1}
    std::vector<double> eps_ratios;  // eps_i / eps_{i+1}
    double commutator_residual = 0.0;  // || [Q, P0] ||
    double idempotence_residual = 0.0; // || (P0 Q)^2 - P0 Q ||
    double sub_left_residual = 0.0;    // || P0 Q P(0+) - P(0+) ||
    double sub_right_residual = 0.0;   // || P(0+) P0 Q - P(0+) ||
    double trace_p0_plus = 0.0;
    bool stable = true;       // differences decrease monotonically
    bool rate_consistent = true; // distance ratios within a factor 2 of eps ratios
    std::string diagnostics;
};

// eps = lambda^2, positive and strictly decreasing, at least two values.
KatoReport kato_structure_check(const RISModel& model, double tau, const std::vector<double>& eps_list);

struct ParametrizedRow {
    double eps;
    double lambda;
    double tau;
    double distance;
};

struct ParametrizedReport {
    int n_odd;
    std::vector<ParametrizedRow> rows;
    std::vector<double> ratios;
    ComplexMatrix effective_state;
};

inline constexpr double kMaxCoupling = 1e4;
inline constexpr double kMinDuration = 1e-12;

// tau = eps^n, lambda = eps^{(1-n)/2}; compares the exact asymptotic state with the
// fast-repetition effective state.
ParametrizedReport parametrized_tau_experiment(const RISModel& model, int n_odd, const std::vector<double>& eps_list,
                                               int jobs = 1);

} // namespace risim
