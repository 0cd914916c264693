// helpers.hpp — shared fixtures for the test binaries

#pragma once

#include <cmath>
#include <limits>
#include <random>

#include "risim/dynamics.hpp"
#include "risim/linalg.hpp"
#include "risim/quadrature.hpp"
#include "risim/spin_model.hpp"

namespace testing {

using risim::Complex;
using risim::ComplexMatrix;

inline double max_abs(const ComplexMatrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

inline ComplexMatrix random_matrix(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = Complex{g(rng), g(rng)};
    return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, int n) {
    const ComplexMatrix m = random_matrix(rng, n);
    return 0.5 * (m + m.adjoint());
}

inline ComplexMatrix random_unitary(std::mt19937_64& rng, int n) {
    Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(rng, n));
    return qr.householderQ() * ComplexMatrix::Identity(n, n);
}

inline ComplexMatrix random_density(std::mt19937_64& rng, int n) {
    const ComplexMatrix m = random_matrix(rng, n);
    ComplexMatrix r = m * m.adjoint();
    return r / r.trace().real();
}

// The reference two-level model (S, E, beta, tau, b, c) = (1, 2, 1, 1, 1, 1), a = d = 0.
inline risim::SpinParams reference_params() {
    risim::SpinParams p;
    p.S = 1.0;
    p.E = 2.0;
    p.beta = 1.0;
    p.b = 1.0;
    p.c = 1.0;
    p.tau = 1.0;
    return p;
}

inline risim::RISModel reference_model() { return risim::build_spin_model(reference_params()); }

// Random model with n_S = n_E = 2 and generic spectra.
inline risim::RISModel random_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.3, 2.0);
    ComplexMatrix h_S = ComplexMatrix::Zero(2, 2), h_E = ComplexMatrix::Zero(2, 2);
    h_S(1, 1) = u(rng);
    h_E(1, 1) = u(rng);
    return risim::RISModel(h_S, h_E, random_hermitian(rng, 4), u(rng));
}

// (1/T) int_0^T e^{tA} b e^{-tA} dt for anti-Hermitian a, by composite Gauss-Legendre
// quadrature on panels of length at most 1/||a||.
inline risim::Superoperator cesaro_mean(const risim::Superoperator& a, const risim::Superoperator& b, double T) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(a.matrix());
    const ComplexMatrix& u = es.eigenvectors();
    const ComplexMatrix u_inv = u.inverse();
    const ComplexMatrix b_eig = u_inv * b.matrix() * u;
    const risim::ComplexVector w = es.eigenvalues();
    const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    const int panels = static_cast<int>(std::ceil(T * scale));
    const double h = T / panels;
    const risim::QuadratureRule rule = risim::gauss_legendre(12);
    ComplexMatrix acc = ComplexMatrix::Zero(b_eig.rows(), b_eig.cols());
    for (int p = 0; p < panels; ++p)
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = h * (p + 0.5 * (rule.nodes[q] + 1.0));
            const double wt = 0.5 * h * rule.weights[q];
            for (Eigen::Index i = 0; i < acc.rows(); ++i)
                for (Eigen::Index j = 0; j < acc.cols(); ++j)
                    acc(i, j) += wt * std::exp(t * (w(i) - w(j))) * b_eig(i, j);
        }
    return risim::Superoperator(u * acc * u_inv / T);
}

// Smallest nonzero distance between eigenvalues of a (the slowest Bohr frequency).
inline double min_gap(const risim::Superoperator& a, double tol = 1e-8) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(a.matrix(), false);
    const risim::ComplexVector& w = es.eigenvalues();
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < w.size(); ++i)
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            const double d = std::abs(w(i) - w(j));
            if (d > tol) gap = std::min(gap, d);
        }
    return gap;
}

} // namespace testing
