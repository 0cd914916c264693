// dynamics.hpp — repeated-interaction model and its exact dynamics
//
// The small system S (dimension n_S) couples for a duration tau to one chain
// element E (dimension n_E) at a time. Observables on the joint space are
// ordered S (x) E. Everything is in the Heisenberg picture unless stated.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "risim/linalg.hpp"

namespace risim {

// Hard limit on n_S * n_E.
inline constexpr int kMaxFullDim = 64;

class RISModel {
public:
    // Validates Hermiticity (1e-12 relative), beta >= 0, dimensions, and p0
    // (projection commuting with h_E) when given. Throws InputError.
    RISModel(ComplexMatrix h_S, ComplexMatrix h_E, ComplexMatrix v, double beta,
             std::optional<ComplexMatrix> p0 = std::nullopt);

    int n_S() const noexcept { return static_cast<int>(h_S_.rows()); }
    int n_E() const noexcept { return static_cast<int>(h_E_.rows()); }
    int full_dim() const noexcept { return n_S() * n_E(); }

    const ComplexMatrix& h_S() const noexcept { return h_S_; }
    const ComplexMatrix& h_E() const noexcept { return h_E_; }
    const ComplexMatrix& v() const noexcept { return v_; }
    double beta() const noexcept { return beta_; }
    const std::optional<ComplexMatrix>& p0() const noexcept { return p0_; }

    RISModel with_p0(std::optional<ComplexMatrix> p0) const;

private:
    ComplexMatrix h_S_, h_E_, v_;
    double beta_;
    std::optional<ComplexMatrix> p0_;
};

// Density matrix of one chain element.
struct ChainState {
    ComplexMatrix rho;
};

// e^{-beta h} / Tr e^{-beta h}, evaluated with the ground energy subtracted.
ChainState gibbs_state(const ComplexMatrix& h, double beta);

// E_S(x) = Tr_E((1 (x) rho_E) x) (x) 1_E, kept as the pair of rectangular maps
// reduce: M_SE -> M_S and embed: M_S -> M_SE.
class ConditionalExpectation {
public:
    ConditionalExpectation(int n_S, const ChainState& state);

    int n_S() const noexcept { return n_S_; }
    int n_E() const noexcept { return n_E_; }

    // n_S^2 x N^2 and N^2 x n_S^2 matrices, N = n_S n_E.
    const ComplexMatrix& reduce_matrix() const noexcept { return reduce_; }
    const ComplexMatrix& embed_matrix() const noexcept { return embed_; }

    // E_S as a superoperator on the joint space.
    Superoperator full() const;
    // x -> Tr_E((1 (x) rho) x)
    ComplexMatrix reduce(const ComplexMatrix& x) const;
    // x_S -> x_S (x) 1
    ComplexMatrix embed(const ComplexMatrix& x_S) const;
    // E_S o F o embed, a superoperator on M_S.
    Superoperator restrict(const Superoperator& f) const;

private:
    int n_S_, n_E_;
    ComplexMatrix reduce_, embed_;
};

ConditionalExpectation conditional_expectation(const RISModel& model);
ConditionalExpectation conditional_expectation(const RISModel& model, const ChainState& state);

// delta_S and alpha_S^t = exp(t delta_S) on M_S.
Superoperator system_derivation(const RISModel& model);
Superoperator system_evolution(const RISModel& model, double t);

// L0 = delta_S + delta_E on the joint space.
Superoperator free_generator(const RISModel& model);
// L0 + i lambda [v, .]
Superoperator full_generator(const RISModel& model, double lambda);
// phi_SE^t = exp(t (L0 + i lambda [v, .]))
Superoperator interaction_dynamics(const RISModel& model, double lambda, double t);

// T(lambda, tau) = E_S o phi_SE^tau o embed. Requires tau >= 0.
Superoperator reduced_map_T(const RISModel& model, double lambda, double tau);

// floor(x), except that x within 1e-9 (relative) of an integer rounds to it.
std::uint64_t lattice_floor(double x);

// T^n o (E_S o phi_SE^{t1} o embed) with n = floor(t / tau), t1 = t - n tau.
Superoperator restricted_dynamics(const RISModel& model, double lambda, double tau, double t);

// Dyson term phi_k^t = int_{0<t1<...<tk<t} g(t1) ... g(tk), g(s) = alpha_SE^s [v,.] alpha_SE^{-s},
// so that phi_SE^t = sum_k (i lambda)^k phi_k^t o alpha_SE^t. Exact block-exponential
// evaluation; k > 8 throws CostGuardError.
Superoperator dyson_term(const RISModel& model, int k, double t);

// The same integral by nested Gauss-Legendre quadrature with `nodes` points per level.
Superoperator dyson_term_quadrature(const RISModel& model, int k, double t, int nodes = 32);

inline constexpr int kMaxDysonOrder = 8;

// e^{growth t} sum_{k>=n} (eps t)^k m^{k+1} a1^k / k!
double dyson_truncation_bound(int n, double eps, double t, double a1_norm, double m = 1.0,
                              double growth = 0.0);

struct H1Report {
    bool applicable = false; // false when the model carries no p0
    bool holds = false;
    bool is_projection = false;
    bool commutes_with_h_E = false;
    double projection_residual = 0.0;
    double commutator_residual = 0.0;
    // || v - (P0 v (1-P0) + (1-P0) v P0) ||, P0 = 1_S (x) p0
    double coupling_residual = 0.0;
    std::string diagnostics;
};

H1Report check_H1(const RISModel& model);

} // namespace risim
