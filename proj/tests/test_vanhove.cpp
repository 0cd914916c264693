#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "risim/errors.hpp"
#include "risim/vanhove.hpp"

using namespace risim;
using testing::max_abs;

namespace {

RISModel with_zero_coupling(const RISModel& m) {
    return RISModel(m.h_S(), m.h_E(), ComplexMatrix::Zero(m.full_dim(), m.full_dim()), m.beta());
}

SpectralDecomposition coordinate_basis(int n) {
    SpectralDecomposition d;
    for (int k = 0; k < n; ++k) {
        ComplexMatrix p = ComplexMatrix::Zero(n, n);
        p(k, k) = 1.0;
        d.clusters.push_back({Complex{double(k), 0.0}, p, 1});
    }
    return d;
}

double commutator_with_basis(const Superoperator& g, const SpectralDecomposition& basis) {
    double worst = 0.0;
    for (const auto& c : basis.clusters)
        worst = std::max(worst, max_abs(g.matrix() * c.projection - c.projection * g.matrix()));
    return worst;
}

} // namespace

TEST_CASE("spectral_average") {
    std::mt19937_64 rng(21);
    const Superoperator b(testing::random_matrix(rng, 4));

    SUBCASE("coordinate projections keep the diagonal") {
        const Superoperator avg = spectral_average(b, coordinate_basis(4));
        const ComplexMatrix expect = b.matrix().diagonal().asDiagonal();
        CHECK(max_abs(avg.matrix() - expect) == 0.0);
    }
    SUBCASE("idempotent and commuting") {
        const RISModel m = testing::reference_model();
        const Superoperator a0 = log_generator_A0(m, 1.0);
        const SpectralDecomposition basis = spectral_decompose(a0);
        const Superoperator once = spectral_average(b, basis);
        CHECK(max_abs(spectral_average(once, basis).matrix() - once.matrix()) < 1e-12);
        CHECK(max_abs((a0 * once - once * a0).matrix()) < 1e-9);
        // an operator commuting with every projection is left alone
        CHECK(max_abs(spectral_average(once, basis).matrix() - once.matrix()) < 1e-12);
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(spectral_average(b, coordinate_basis(3)), InputError);
    }
}

TEST_CASE("log_generator_A0") {
    const RISModel m = testing::reference_model();
    CHECK(max_abs(log_generator_A0(m, 0.0).matrix()) == 0.0);

    const Superoperator a0 = log_generator_A0(m, 1.0, kPi);
    Eigen::ComplexEigenSolver<ComplexMatrix> es(a0.matrix(), false);
    std::vector<double> im;
    for (Eigen::Index i = 0; i < 4; ++i) {
        CHECK(std::abs(es.eigenvalues()(i).real()) < 1e-12);
        im.push_back(es.eigenvalues()(i).imag());
    }
    std::sort(im.begin(), im.end());
    CHECK(im[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(im[1]) < 1e-12);
    CHECK(std::abs(im[2]) < 1e-12);
    CHECK(im[3] == doctest::Approx(1.0).epsilon(1e-12));

    for (double tau : {0.3, 1.0, 2.5, 4.0})
        CHECK(max_abs(matrix_exp(log_generator_A0(m, tau)).matrix() - system_evolution(m, tau).matrix()) < 1e-10);

    // tau S a multiple of 2 pi
    CHECK(max_abs(log_generator_A0(m, 2 * kPi).matrix()) < 1e-10);
    CHECK_THROWS_AS(log_generator_A0(m, -1.0), InputError);
}

TEST_CASE("second_order_term") {
    const RISModel m = testing::reference_model();
    CHECK(max_abs(second_order_term(with_zero_coupling(m), 1.0).matrix()) == 0.0);
    CHECK_THROWS_AS(second_order_term(m, 0.0), InputError);

    // tau -> 0: (tau^2 / 2) E_S [v,.]^2 + O(tau^3)
    const Superoperator c = commutator_superop(m.v());
    const Superoperator leading = conditional_expectation(m).restrict(c * c);
    auto deviation = [&](double tau) {
        return superop_norm(second_order_term(m, tau) - (0.5 * tau * tau) * leading);
    };
    const double r = deviation(0.1) / deviation(0.05);
    CHECK(r > 6.0);
    CHECK(r < 10.0);
}

TEST_CASE("effective_generator_weak_coupling") {
    const RISModel m = testing::reference_model();
    SUBCASE("zero coupling") {
        const EffectiveGenerator g = effective_generator_weak_coupling(with_zero_coupling(m), 1.0);
        CHECK(max_abs(g.generator.matrix()) == 0.0);
    }
    SUBCASE("reference deltas and invariants") {
        const EffectiveGenerator g = effective_generator_weak_coupling(m, 1.0);
        CHECK(g.regime == Regime::weak_coupling);
        REQUIRE(g.branch_cut_angle.has_value());
        const ComplexMatrix& G = g.generator.matrix();
        CHECK(std::abs(G(0, 0) - oracle::kDelta0) < 1e-12);
        CHECK(std::abs(G(3, 3) - oracle::kDelta1) < 1e-12);
        CHECK(max_abs(G * vec(ComplexMatrix::Identity(2, 2))) < 1e-10);
        CHECK(commutator_with_basis(g.generator, g.averaging_basis) < 1e-9);
        for (double s : {0.1, 1.0, 10.0}) CHECK(superop_norm(matrix_exp(s * g.generator)) <= std::sqrt(2.0) + 1e-12);
    }
    SUBCASE("explicit cut is recorded") {
        const EffectiveGenerator g = effective_generator_weak_coupling(m, 1.0, 2.0);
        CHECK(*g.branch_cut_angle == 2.0);
        CHECK(std::abs(g.generator.matrix()(0, 0) - oracle::kDelta0) < 1e-12);
    }
    SUBCASE("cut through an eigenvalue") {
        CHECK_THROWS_AS(effective_generator_weak_coupling(m, 1.0, 0.0), BranchCutError);
    }
}

TEST_CASE("effective_generator_fast_repetition") {
    SpinParams p = testing::reference_params();
    p.c = 0.0;
    const RISModel m = build_spin_model(p);
    const EffectiveGenerator g = effective_generator_fast_repetition(m);
    CHECK(g.regime == Regime::fast_repetition);
    CHECK_FALSE(g.branch_cut_angle.has_value());
    CHECK(std::abs(g.generator.matrix()(0, 0) - oracle::kFastLimit0) < 1e-12);
    CHECK(std::abs(g.generator.matrix()(3, 3) - oracle::kFastLimit1) < 1e-12);
    CHECK(commutator_with_basis(g.generator, g.averaging_basis) < 1e-9);
    CHECK(max_abs(effective_generator_fast_repetition(with_zero_coupling(m)).generator.matrix()) == 0.0);

    // weak-coupling generator / tau^2 approaches it at rate O(tau)
    auto gap = [&](double tau) {
        SpinParams q = p;
        q.tau = tau;
        const Superoperator w = effective_generator_weak_coupling(build_spin_model(q), tau).generator;
        return superop_norm((1.0 / (tau * tau)) * w - g.generator);
    };
    const double r = gap(0.1) / gap(0.05);
    CHECK(r > 1.5);
    CHECK(r < 4.5);
}

TEST_CASE("converge_lambda") {
    const RISModel m = testing::reference_model();
    SweepGrid grid;
    const ConvergenceReport rep = converge_lambda(m, 1.0, {0.2, 0.1, 0.05}, grid);
    CHECK(rep.regime == Regime::weak_coupling);
    REQUIRE(rep.rows.size() == 150);
    REQUIRE(rep.sup_errors.size() == 3);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        CHECK(rep.rows[i].error >= 0.0);
        if (rep.rows[i].s == 0.0) CHECK(rep.rows[i].error < 1e-12);
        if (i > 0) {
            const auto& a = rep.rows[i - 1];
            const auto& b = rep.rows[i];
            CHECK((a.parameter < b.parameter || (a.parameter == b.parameter && a.s < b.s)));
        }
    }
    CHECK(rep.sup_errors[0].second > rep.sup_errors[1].second);
    CHECK(rep.sup_errors[1].second > rep.sup_errors[2].second);
    REQUIRE(rep.decay_ratios.size() == 2);
    for (const auto& d : rep.decay_ratios) CHECK(d.ratio >= 2.0);

    const ConvergenceReport par = converge_lambda(m, 1.0, {0.2, 0.1, 0.05}, grid, 3);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) CHECK(par.rows[i].error == rep.rows[i].error);

    CHECK_THROWS_AS(converge_lambda(m, 1.0, {0.1, 0.2}, grid), InputError);
    CHECK_THROWS_AS(converge_lambda(m, 1.0, {}, grid), InputError);
    CHECK_THROWS_AS(converge_lambda(m, 1.0, {0.1}, SweepGrid{5.0, 1}), InputError);
    CHECK_THROWS_AS(converge_lambda(m, 1.0, {1e-4}, grid), CostGuardError);
}

TEST_CASE("converge_lambda_interpolated") {
    const RISModel m = testing::reference_model();
    SUBCASE("lattice points reproduce the lattice sweep") {
        const SweepGrid grid{1.0, 5}; // s = 0.25 k = lambda^2 tau k for lambda = 0.5
        const ConvergenceReport a = converge_lambda(m, 1.0, {0.5}, grid);
        const ConvergenceReport b = converge_lambda_interpolated(m, 1.0, {0.5}, grid);
        REQUIRE(a.rows.size() == b.rows.size());
        for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(std::abs(a.rows[i].error - b.rows[i].error) < 1e-12);
    }
    SUBCASE("decreasing in lambda") {
        const ConvergenceReport r = converge_lambda_interpolated(m, 1.0, {0.2, 0.1}, SweepGrid{});
        CHECK(r.sup_errors[0].second > r.sup_errors[1].second);
    }
}

TEST_CASE("converge_tau") {
    const RISModel m = testing::reference_model();
    const SweepGrid grid{};
    SUBCASE("zero coupling") {
        const ConvergenceReport r = converge_tau(with_zero_coupling(m), {{1.0, 0.2}, {1.0, 0.1}}, grid);
        for (const auto& row : r.rows) CHECK(row.error < 1e-12);
    }
    SUBCASE("rate O(tau)") {
        const ConvergenceReport r = converge_tau(m, {{1.0, 0.2}, {1.0, 0.1}, {1.0, 0.05}}, grid);
        CHECK(r.regime == Regime::fast_repetition);
        REQUIRE(r.decay_ratios.size() == 2);
        for (const auto& d : r.decay_ratios) CHECK(d.ratio >= 1.5);
        CHECK(r.sup_errors[0].first == 0.2); // parameter is tau
    }
    SUBCASE("diverging coupling") {
        std::vector<std::pair<double, double>> pairs;
        for (double tau : {0.2, 0.1, 0.05}) pairs.emplace_back(std::pow(tau, -0.25), tau);
        const ConvergenceReport r = converge_tau(m, pairs, grid);
        CHECK(r.sup_errors[0].second > r.sup_errors[1].second);
        CHECK(r.sup_errors[1].second > r.sup_errors[2].second);
    }
    SUBCASE("tau must decrease") {
        CHECK_THROWS_AS(converge_tau(m, {{1.0, 0.1}, {1.0, 0.2}}, grid), InputError);
    }
}

TEST_CASE("Cesaro mean of the free orbit approaches the spectral average") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 5; ++trial) {
        const RISModel m = testing::random_model(rng);
        const double tau = 0.7;
        const Superoperator a0 = log_generator_A0(m, tau);
        const Superoperator b = second_order_term(m, tau);
        const Superoperator avg = spectral_average(b, spectral_decompose(a0));
        const double gap = testing::min_gap(a0);
        const double e1 = superop_norm(testing::cesaro_mean(a0, b, 200.0 / gap) - avg);
        const double e2 = superop_norm(testing::cesaro_mean(a0, b, 2e4 / gap) - avg);
        CHECK(e2 < 1e-4);
        CHECK(e2 < e1);
    }
}
