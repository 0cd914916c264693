// dynamics.cpp — repeated-interaction model and its exact dynamics

#include "risim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "risim/errors.hpp"
#include "risim/quadrature.hpp"

namespace risim {

namespace {

void require_square(const ComplexMatrix& m, const char* name) {
    if (m.rows() < 1 || m.rows() != m.cols()) {
        throw InputError(std::string(name) + " must be a non-empty square matrix");
    }
    if (!all_finite(m)) throw InputError(std::string(name) + " has non-finite entries");
}

void require_hermitian(const ComplexMatrix& m, const char* name) {
    if (!is_hermitian(m)) {
        std::ostringstream os;
        os << name << " is not Hermitian (max asymmetry " << hermitian_asymmetry(m) << ")";
        throw InputError(os.str());
    }
}

double scaled_tol(const ComplexMatrix& a) {
    return 1e-12 * std::max(1.0, a.size() ? a.cwiseAbs().maxCoeff() : 0.0);
}

ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

} // namespace

RISModel::RISModel(ComplexMatrix h_S, ComplexMatrix h_E, ComplexMatrix v, double beta,
                   std::optional<ComplexMatrix> p0)
    : h_S_(std::move(h_S)), h_E_(std::move(h_E)), v_(std::move(v)), beta_(beta), p0_(std::move(p0)) {
    require_square(h_S_, "h_S");
    require_square(h_E_, "h_E");
    require_square(v_, "v");
    if (h_S_.rows() * h_E_.rows() > kMaxFullDim) {
        throw InputError("n_S * n_E exceeds the dimension cap of " + std::to_string(kMaxFullDim));
    }
    if (v_.rows() != h_S_.rows() * h_E_.rows()) {
        throw InputError("v must have dimension n_S * n_E");
    }
    require_hermitian(h_S_, "h_S");
    require_hermitian(h_E_, "h_E");
    require_hermitian(v_, "v");
    if (!std::isfinite(beta_) || beta_ < 0.0) throw InputError("beta must be finite and >= 0");
    if (p0_) {
        const ComplexMatrix& p = *p0_;
        require_square(p, "p0");
        if (p.rows() != h_E_.rows()) throw InputError("p0 must have the chain-element dimension");
        const double tol = 1e-12;
        if ((p * p - p).cwiseAbs().maxCoeff() > tol || hermitian_asymmetry(p) > tol) {
            throw InputError("p0 is not an orthogonal projection");
        }
        if ((h_E_ * p - p * h_E_).cwiseAbs().maxCoeff() > scaled_tol(h_E_)) {
            throw InputError("p0 does not commute with h_E");
        }
    }
}

RISModel RISModel::with_p0(std::optional<ComplexMatrix> p0) const {
    return RISModel(h_S_, h_E_, v_, beta_, std::move(p0));
}

ChainState gibbs_state(const ComplexMatrix& h, double beta) {
    require_square(h, "h");
    require_hermitian(h, "h");
    if (!std::isfinite(beta) || beta < 0.0) throw InputError("beta must be finite and >= 0");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()));
    const Eigen::VectorXd& e = es.eigenvalues();
    const double e0 = e.minCoeff();
    Eigen::VectorXd w(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) w(i) = std::exp(-beta * (e(i) - e0));
    w /= w.sum();
    const ComplexMatrix& u = es.eigenvectors();
    ComplexMatrix rho = u * w.cast<Complex>().asDiagonal() * u.adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    return {rho};
}

// ---------------------------------------------------------------------------

ConditionalExpectation::ConditionalExpectation(int n_S, const ChainState& state)
    : n_S_(n_S), n_E_(static_cast<int>(state.rho.rows())) {
    if (n_S_ < 1) throw InputError("n_S must be positive");
    require_square(state.rho, "rho_E");
    const int nE = n_E_;
    const int N = n_S_ * nE;
    const ComplexMatrix& rho = state.rho;

    reduce_ = ComplexMatrix::Zero(n_S_ * n_S_, N * N);
    for (int a = 0; a < n_S_; ++a)
        for (int b = 0; b < n_S_; ++b)
            for (int f = 0; f < nE; ++f)
                for (int e = 0; e < nE; ++e) {
                    const int row = a * nE + f, col = b * nE + e;
                    reduce_(a * n_S_ + b, row * N + col) += rho(e, f);
                }

    embed_ = ComplexMatrix::Zero(N * N, n_S_ * n_S_);
    for (int k = 0; k < n_S_; ++k)
        for (int l = 0; l < n_S_; ++l)
            for (int e = 0; e < nE; ++e) embed_((k * nE + e) * N + (l * nE + e), k * n_S_ + l) = 1.0;
}

Superoperator ConditionalExpectation::full() const { return Superoperator(embed_ * reduce_); }

ComplexMatrix ConditionalExpectation::reduce(const ComplexMatrix& x) const {
    const int N = n_S_ * n_E_;
    if (x.rows() != N || x.cols() != N) throw InputError("conditional expectation: dimension mismatch");
    return unvec(reduce_ * vec(x), n_S_);
}

ComplexMatrix ConditionalExpectation::embed(const ComplexMatrix& x_S) const {
    if (x_S.rows() != n_S_ || x_S.cols() != n_S_) throw InputError("embed: dimension mismatch");
    return kron(x_S, identity(n_E_));
}

Superoperator ConditionalExpectation::restrict(const Superoperator& f) const {
    if (f.dim() != n_S_ * n_E_) throw InputError("restrict: dimension mismatch");
    return Superoperator(reduce_ * f.matrix() * embed_);
}

ConditionalExpectation conditional_expectation(const RISModel& model) {
    return ConditionalExpectation(model.n_S(), gibbs_state(model.h_E(), model.beta()));
}

ConditionalExpectation conditional_expectation(const RISModel& model, const ChainState& state) {
    if (state.rho.rows() != model.n_E()) throw InputError("chain state dimension differs from n_E");
    return ConditionalExpectation(model.n_S(), state);
}

// ---------------------------------------------------------------------------

Superoperator system_derivation(const RISModel& model) { return derivation_superop(model.h_S()); }

Superoperator system_evolution(const RISModel& model, double t) {
    return matrix_exp(t * system_derivation(model));
}

Superoperator free_generator(const RISModel& model) {
    const ComplexMatrix h = kron(model.h_S(), identity(model.n_E())) + kron(identity(model.n_S()), model.h_E());
    return derivation_superop(h);
}

Superoperator full_generator(const RISModel& model, double lambda) {
    if (!std::isfinite(lambda)) throw InputError("lambda must be finite");
    return free_generator(model) + Complex{0.0, lambda} * commutator_superop(model.v());
}

Superoperator interaction_dynamics(const RISModel& model, double lambda, double t) {
    if (!std::isfinite(t)) throw InputError("t must be finite");
    return matrix_exp(t * full_generator(model, lambda));
}

Superoperator reduced_map_T(const RISModel& model, double lambda, double tau) {
    if (!std::isfinite(tau) || tau < 0.0) throw InputError("tau must be finite and >= 0");
    return conditional_expectation(model).restrict(interaction_dynamics(model, lambda, tau));
}

std::uint64_t lattice_floor(double x) {
    if (!std::isfinite(x) || x < 0.0) throw InputError("lattice_floor: argument must be finite and >= 0");
    if (x >= 1.8e19) throw CostGuardError("lattice_floor: argument too large");
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return static_cast<std::uint64_t>(r);
    return static_cast<std::uint64_t>(std::floor(x));
}

Superoperator restricted_dynamics(const RISModel& model, double lambda, double tau, double t) {
    if (!std::isfinite(tau) || tau <= 0.0) throw InputError("tau must be finite and > 0");
    if (!std::isfinite(t) || t < 0.0) throw InputError("t must be finite and >= 0");
    const std::uint64_t n = lattice_floor(t / tau);
    const double t1 = std::max(0.0, t - static_cast<double>(n) * tau);
    const ConditionalExpectation es = conditional_expectation(model);
    const Superoperator tn = es.restrict(interaction_dynamics(model, lambda, tau)).pow(n);
    if (t1 == 0.0) return tn;
    return tn * es.restrict(interaction_dynamics(model, lambda, t1));
}

// ---------------------------------------------------------------------------

Superoperator dyson_term(const RISModel& model, int k, double t) {
    if (k < 1) throw InputError("dyson_term: k must be >= 1");
    if (k > kMaxDysonOrder) {
        throw CostGuardError("dyson_term: order " + std::to_string(k) + " exceeds the limit of " +
                             std::to_string(kMaxDysonOrder));
    }
    if (!std::isfinite(t)) throw InputError("dyson_term: t must be finite");
    const ComplexMatrix l0 = free_generator(model).matrix();
    const ComplexMatrix c = commutator_superop(model.v()).matrix();
    const Eigen::Index m = l0.rows();
    ComplexMatrix big = ComplexMatrix::Zero((k + 1) * m, (k + 1) * m);
    for (int j = 0; j <= k; ++j) {
        big.block(j * m, j * m, m, m) = t * l0;
        if (j < k) big.block(j * m, (j + 1) * m, m, m) = t * c;
    }
    const ComplexMatrix e = matrix_exp(big);
    return Superoperator(e.block(0, k * m, m, m) * matrix_exp(ComplexMatrix(-t * l0)));
}

Superoperator dyson_term_quadrature(const RISModel& model, int k, double t, int nodes) {
    if (k < 1) throw InputError("dyson_term_quadrature: k must be >= 1");
    if (k > kMaxDysonOrder) throw CostGuardError("dyson_term_quadrature: order too large");
    if (nodes < 1) throw InputError("dyson_term_quadrature: need at least one node");
    if (std::pow(static_cast<double>(nodes), k) > 1e7) {
        throw CostGuardError("dyson_term_quadrature: nodes^k exceeds 1e7 evaluations");
    }
    // L0 = -i H with H Hermitian, so alpha^s = U e^{-isH} U^dagger.
    const ComplexMatrix l0 = free_generator(model).matrix();
    const ComplexMatrix h = Complex{0.0, 1.0} * l0;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()));
    const ComplexMatrix& u = es.eigenvectors();
    const Eigen::VectorXd& w = es.eigenvalues();
    const ComplexMatrix c = commutator_superop(model.v()).matrix();
    const ComplexMatrix c_rot = u.adjoint() * c * u;
    const Eigen::Index m = l0.rows();

    auto g = [&](double s) {
        // alpha^s C alpha^{-s} in the eigenbasis: C_jl e^{-is(w_j - w_l)}
        ComplexMatrix r(m, m);
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index l = 0; l < m; ++l)
                r(j, l) = c_rot(j, l) * std::exp(Complex{0.0, -s * (w(j) - w(l))});
        return r;
    };
    const QuadratureRule rule = gauss_legendre(nodes);

    // F_j(u) = int_0^u F_{j-1}(s) g(s) ds, F_0 = 1
    std::function<ComplexMatrix(int, double)> level = [&](int j, double upper) -> ComplexMatrix {
        if (j == 0) return ComplexMatrix::Identity(m, m);
        ComplexMatrix acc = ComplexMatrix::Zero(m, m);
        const double half = 0.5 * upper;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double s = half * (1.0 + rule.nodes[q]);
            acc += (half * rule.weights[q]) * (level(j - 1, s) * g(s));
        }
        return acc;
    };
    return Superoperator(u * level(k, t) * u.adjoint());
}

double dyson_truncation_bound(int n, double eps, double t, double a1_norm, double m, double growth) {
    if (n < 1) throw InputError("dyson_truncation_bound: n must be >= 1");
    for (double x : {eps, t, a1_norm, m, growth}) {
        if (!std::isfinite(x) || x < 0.0) {
            throw InputError("dyson_truncation_bound: arguments must be finite and >= 0");
        }
    }
    const double y = eps * t * m * a1_norm;
    if (y == 0.0) return 0.0;
    // term_k = m y^k / k!
    double term = m * std::exp(n * std::log(y) - std::lgamma(n + 1.0));
    double sum = 0.0;
    for (int k = n; k < n + 100000; ++k) {
        sum += term;
        if (k > y && term < 1e-18 * sum) break;
        term *= y / (k + 1.0);
    }
    return std::exp(growth * t) * sum;
}

H1Report check_H1(const RISModel& model) {
    H1Report r;
    if (!model.p0()) {
        r.diagnostics = "not applicable: model has no p0";
        return r;
    }
    r.applicable = true;
    const ComplexMatrix& p = *model.p0();
    r.projection_residual = std::max((p * p - p).cwiseAbs().maxCoeff(), hermitian_asymmetry(p));
    r.is_projection = r.projection_residual <= 1e-12;
    r.commutator_residual = (model.h_E() * p - p * model.h_E()).cwiseAbs().maxCoeff();
    r.commutes_with_h_E = r.commutator_residual <= scaled_tol(model.h_E());

    const ComplexMatrix big_p = kron(identity(model.n_S()), p);
    const ComplexMatrix q = identity(model.full_dim()) - big_p;
    const ComplexMatrix& v = model.v();
    r.coupling_residual = spectral_norm(v - (big_p * v * q + q * v * big_p));
    const bool coupling_ok = r.coupling_residual <= 1e-12 * std::max(1.0, spectral_norm(v));
    r.holds = r.is_projection && r.commutes_with_h_E && coupling_ok;

    std::ostringstream os;
    if (!r.is_projection) os << "p0 is not a projection (residual " << r.projection_residual << "); ";
    if (!r.commutes_with_h_E) os << "[h_E, p0] != 0 (residual " << r.commutator_residual << "); ";
    if (!coupling_ok) {
        const double diag_p = spectral_norm(big_p * v * big_p);
        const double diag_q = spectral_norm(q * v * q);
        os << "v has block-diagonal parts w.r.t. P0: ||P0 v P0|| = " << diag_p
           << ", ||(1-P0) v (1-P0)|| = " << diag_q << "; ";
    }
    r.diagnostics = r.holds ? "H1 holds" : os.str();
    return r;
}

} // namespace risim
