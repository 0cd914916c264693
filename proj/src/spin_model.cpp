// spin_model.cpp — closed forms for the two-level example

#include "risim/spin_model.hpp"

#include <cmath>

#include "risim/errors.hpp"
#include "risim/vanhove.hpp"

namespace risim {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Row-major indices of u00, u11, u01, u10.
constexpr int kU00 = 0, kU11 = 3, kU01 = 1, kU10 = 2;

} // namespace

void validate(const SpinParams& p) {
    if (!std::isfinite(p.S) || !std::isfinite(p.E)) throw InputError("S and E must be finite");
    if (!std::isfinite(p.beta) || p.beta < 0.0) throw InputError("beta must be finite and >= 0");
    if (!std::isfinite(p.tau) || p.tau <= 0.0) throw InputError("tau must be finite and > 0");
    if (!finite(p.a) || !finite(p.b) || !finite(p.c) || !finite(p.d)) {
        throw InputError("interaction entries must be finite");
    }
}

RISModel build_spin_model(const SpinParams& p) {
    validate(p);
    ComplexMatrix h_S = ComplexMatrix::Zero(2, 2);
    h_S(1, 1) = p.S;
    ComplexMatrix h_E = ComplexMatrix::Zero(2, 2);
    h_E(1, 1) = p.E;
    ComplexMatrix raise = ComplexMatrix::Zero(2, 2);
    raise(0, 1) = 1.0;
    ComplexMatrix k(2, 2);
    k << p.a, p.c, p.b, p.d;
    const ComplexMatrix v = kron(raise, k) + kron(raise.adjoint(), k.adjoint());
    std::optional<ComplexMatrix> p0;
    if (p.a == Complex{0.0, 0.0} && p.d == Complex{0.0, 0.0}) p0 = unit_matrix(2, 0, 0);
    return RISModel(h_S, h_E, v, p.beta, p0);
}

double resonance_kernel(double x, double tau) {
    const double y = tau * x;
    if (std::abs(y) < 1e-4) {
        // 2 sin^2(y/2) / x^2 = tau^2/2 (1 - y^2/12 + y^4/360 - ...)
        const double y2 = y * y;
        return 0.5 * tau * tau * (1.0 - y2 / 12.0 + y2 * y2 / 360.0);
    }
    const double s = std::sin(0.5 * y);
    return 2.0 * s * s / (x * x);
}

SpinDeltas closed_form_deltas(const SpinParams& p) {
    validate(p);
    const double w = std::exp(-p.beta * p.E);
    const double z = 1.0 + w;
    const double kb = std::norm(p.b) * resonance_kernel(p.E - p.S, p.tau);
    const double kc = std::norm(p.c) * resonance_kernel(p.E + p.S, p.tau);
    return {-2.0 / z * (w * kb + kc), -2.0 / z * (kb + w * kc)};
}

SpinGeneratorReport closed_form_generator_checks(const SpinParams& p) {
    const RISModel model = build_spin_model(p);
    const ComplexMatrix g = effective_generator_weak_coupling(model, p.tau).generator.matrix();

    SpinGeneratorReport r{};
    r.closed_form = closed_form_deltas(p);
    r.pipeline_delta0 = g(kU00, kU00).real();
    r.pipeline_delta1 = g(kU11, kU11).real();
    r.diagonal_oracle_applicable = p.a == Complex{0.0, 0.0} && p.d == Complex{0.0, 0.0};

    const int pop[2] = {kU00, kU11};
    const int coh[2] = {kU01, kU10};
    for (int i : pop)
        for (int j : coh) r.block_residual = std::max({r.block_residual, std::abs(g(i, j)), std::abs(g(j, i))});
    const double d0 = r.closed_form.delta0, d1 = r.closed_form.delta1;
    const Complex expected[2][2] = {{d0, -d0}, {-d1, d1}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r.diagonal_block_residual =
                std::max(r.diagonal_block_residual, std::abs(g(pop[i], pop[j]) - expected[i][j]));
    r.row_sum_residual = (g * vec(ComplexMatrix::Identity(2, 2))).norm();

    ComplexMatrix bmat(2, 2);
    bmat << p.a, p.b, p.c, p.d;
    const double bnorm = spectral_norm(bmat);
    for (double tau : {0.1, 0.05}) {
        SpinParams q = p;
        q.tau = tau;
        const ComplexMatrix gq = effective_generator_weak_coupling(build_spin_model(q), tau).generator.matrix();
        OffDiagonalCheck c{tau, gq(kU01, kU01).real(), gq(kU10, kU10).real(),
                           -0.5 * tau * tau * p.coupling_weight(), 10.0 * tau * tau * tau * bnorm * bnorm, false};
        c.holds = c.re_u01 <= c.bound + c.slack && c.re_u10 <= c.bound + c.slack;
        r.off_diagonal.push_back(c);
    }
    return r;
}

ComplexMatrix spin_asymptotic_state(const SpinParams& p) {
    validate(p);
    if (p.S == 0.0) throw InputError("spin_asymptotic_state: S must be nonzero");
    if (p.coupling_weight() == 0.0) throw NoAsymptoticStateError("|b|^2 + |c|^2 = 0: populations never relax");
    const SpinDeltas d = closed_form_deltas(p);
    const double sum = d.delta0 + d.delta1;
    if (sum == 0.0) throw NoAsymptoticStateError("delta0 + delta1 = 0: both transition kernels vanish");
    ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
    rho(0, 0) = d.delta1 / sum;
    rho(1, 1) = d.delta0 / sum;
    return rho;
}

} // namespace risim
