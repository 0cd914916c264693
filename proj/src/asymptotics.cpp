// asymptotics.cpp — peripheral spectra, limit projections and asymptotic states

#include "risim/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "risim/errors.hpp"
#include "risim/parallel.hpp"

namespace risim {

namespace {

constexpr double kEigenTol = 1e-8;
constexpr double kFlat = 1e-13;

const SpectralCluster* cluster_at(const SpectralDecomposition& d, Complex z) { return d.find(z, kEigenTol); }

ComplexMatrix hermitize(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

} // namespace

std::vector<Complex> peripheral_spectrum(const Superoperator& t_map, double tol) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(t_map.matrix(), false);
    std::vector<Complex> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const Complex mu = es.eigenvalues()(i);
        if (std::abs(mu) >= 1.0 - tol) out.push_back(mu);
    }
    std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
        if (std::arg(a) != std::arg(b)) return std::arg(a) < std::arg(b);
        return std::abs(a) < std::abs(b);
    });
    return out;
}

LimitProjection limit_projection(const Superoperator& t_map, double tol, std::uint64_t max_power) {
    if (!(tol > 0.0)) throw InputError("limit_projection: tol must be > 0");
    if (max_power < 1) throw InputError("limit_projection: max_power must be >= 1");
    SpectralDecomposition d;
    try {
        d = spectral_decompose(t_map, kEigenTol, SpectralMode::general);
    } catch (const DefectError& e) {
        throw DefectError(std::string("limit_projection: map is not diagonalizable (possible Jordan block at 1): ") +
                          e.what());
    }
    LimitProjection out{Superoperator::zero(t_map.dim()), false, 0, {}, d.condition_number, {}};
    bool others_inside = true;
    for (const auto& c : d.clusters) {
        if (std::abs(c.eigenvalue - 1.0) <= kEigenTol) {
            out.projection = Superoperator(c.projection);
            out.multiplicity = c.multiplicity;
        } else if (std::abs(c.eigenvalue) >= 1.0 - tol) {
            others_inside = false;
        }
    }
    out.peripheral = peripheral_spectrum(t_map, tol);
    if (out.multiplicity > 0) {
        const ComplexMatrix& p = out.projection.matrix();
        const double defect = spectral_norm(t_map.matrix() * p - p);
        if (defect > 1e-8 * std::max(1.0, spectral_norm(t_map.matrix()))) {
            throw DefectError("limit_projection: eigenvalue 1 is not semisimple");
        }
    }

    // ||T^{2^j} - P|| by repeated squaring, until the floor or max_power.
    ComplexMatrix power = t_map.matrix();
    const ComplexMatrix& p = out.projection.matrix();
    bool monotone = true;
    constexpr double kFloor = 1e-12;
    for (std::uint64_t k = 1;; k *= 2) {
        const double r = spectral_norm(power - p);
        if (!out.residuals.empty() && r > out.residuals.back() * (1.0 + 1e-9) + kFloor) monotone = false;
        out.residuals.push_back(r);
        if (r <= kFloor || k > max_power / 2) break;
        power = power * power;
    }
    out.converged = others_inside && out.multiplicity > 0 && monotone;
    return out;
}

ComplexMatrix state_of_projection(const Superoperator& p) {
    // P(x) = Tr(rho x) 1: row (0,0) of P holds f with f_kl = rho_lk.
    const int n = p.dim();
    const ComplexVector f = p.matrix().row(0).transpose();
    ComplexMatrix rho = unvec(f, n).transpose();
    rho = hermitize(rho);
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-300) throw NoAsymptoticStateError("fixed functional has zero trace");
    return rho / tr.real();
}

namespace {

// Unique fixed state of a reduced map, or NoAsymptoticStateError.
std::pair<LimitProjection, ComplexMatrix> unique_fixed_state(const Superoperator& t) {
    LimitProjection lp = limit_projection(t);
    int peripheral_others = 0;
    for (const Complex& mu : lp.peripheral)
        if (std::abs(mu - 1.0) > kEigenTol) ++peripheral_others;
    if (lp.multiplicity != 1 || peripheral_others > 0) {
        std::ostringstream os;
        os << "no unique asymptotic state: eigenvalue 1 has multiplicity " << lp.multiplicity << " and "
           << peripheral_others << " other peripheral eigenvalue(s)";
        throw NoAsymptoticStateError(os.str());
    }
    ComplexMatrix rho = state_of_projection(lp.projection);
    return {std::move(lp), std::move(rho)};
}

} // namespace

AsymptoticReport asymptotic_periodic_state(const RISModel& model, double lambda, double tau,
                                           const std::vector<double>& t_samples) {
    if (!std::isfinite(tau) || tau <= 0.0) throw InputError("tau must be finite and > 0");
    for (double t : t_samples) {
        if (!std::isfinite(t) || t < 0.0 || t >= tau) throw InputError("t_samples must lie in [0, tau)");
    }
    const Superoperator t_map = reduced_map_T(model, lambda, tau);
    auto [lp, rho] = unique_fixed_state(t_map);

    AsymptoticReport rep{lp.peripheral, lp.projection, true, rho, {}, 0.0, lp.condition_number};
    const ConditionalExpectation es = conditional_expectation(model);
    for (double t : t_samples) {
        const Superoperator r_t = es.restrict(interaction_dynamics(model, lambda, t));
        ComplexMatrix rho_t = hermitize(r_t.dual().apply(rho));
        // one period later: phi_res^{t + tau} = T o R(t)
        const ComplexMatrix rho_shift = hermitize(restricted_dynamics(model, lambda, tau, t + tau).dual().apply(rho));
        rep.periodicity_residual = std::max(rep.periodicity_residual, trace_distance(rho_t, rho_shift));
        rep.period_samples.emplace_back(t, std::move(rho_t));
    }
    return rep;
}

EffectiveState effective_asymptotic_state(const EffectiveGenerator& gen, double tol, double horizon) {
    if (!(tol > 0.0)) throw InputError("effective_asymptotic_state: tol must be > 0");
    const Superoperator& g = gen.generator;
    SpectralDecomposition d;
    try {
        d = spectral_decompose(g, kEigenTol, SpectralMode::general);
    } catch (const DefectError& e) {
        throw DefectError(std::string("effective_asymptotic_state: generator is not diagonalizable: ") + e.what());
    }
    EffectiveState out;
    for (const auto& c : d.clusters)
        for (int k = 0; k < c.multiplicity; ++k) out.eigenvalues.push_back(c.eigenvalue);

    const SpectralCluster* zero = cluster_at(d, Complex{0.0, 0.0});
    if (zero == nullptr) throw DefectError("effective_asymptotic_state: generator does not annihilate a state");
    bool others_decay = true;
    for (const auto& c : d.clusters)
        if (&c != zero && !(c.eigenvalue.real() < -tol)) others_decay = false;
    out.rank_one = zero->multiplicity == 1 && others_decay;
    const Superoperator p(zero->projection);
    const double defect = spectral_norm(g.matrix() * p.matrix());
    if (defect > 1e-8 * std::max(1.0, superop_norm(g))) throw DefectError("eigenvalue 0 of the generator is defective");
    out.state = state_of_projection(p);
    if (out.rank_one && std::isfinite(horizon) && horizon > 0.0) {
        out.horizon_residual = spectral_norm(matrix_exp(horizon * g).matrix() - p.matrix());
    }
    return out;
}

OrderComparison compare_orders(const RISModel& model, double tau, const std::vector<double>& lambdas, int jobs) {
    if (lambdas.empty()) throw InputError("lambdas must be non-empty");
    const EffectiveState eff = effective_asymptotic_state(effective_generator_weak_coupling(model, tau));
    if (!eff.rank_one) throw NoAsymptoticStateError("weak-coupling effective dynamics has no unique asymptotic state");
    OrderComparison out{std::vector<OrderRow>(lambdas.size()), {}, eff.state};
    parallel_for(lambdas.size(), jobs, [&](std::size_t i) {
        const auto [lp, rho] = unique_fixed_state(reduced_map_T(model, lambdas[i], tau));
        out.rows[i] = {lambdas[i], trace_distance(rho, eff.state)};
    });
    for (std::size_t i = 0; i + 1 < out.rows.size(); ++i) {
        const double next = out.rows[i + 1].distance;
        out.ratios.push_back(next > 0.0 ? out.rows[i].distance / next : std::numeric_limits<double>::infinity());
    }
    return out;
}

KatoReport kato_structure_check(const RISModel& model, double tau, const std::vector<double>& eps_list) {
    if (!std::isfinite(tau) || tau <= 0.0) throw InputError("tau must be finite and > 0");
    if (eps_list.size() < 2) throw InputError("kato_structure_check: need at least two eps values");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!std::isfinite(eps_list[i]) || eps_list[i] <= 0.0) throw InputError("eps values must be > 0");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw InputError("eps values must be strictly decreasing");
    }
    const int n = model.n_S();
    const Superoperator alpha = system_evolution(model, tau);
    const SpectralDecomposition da = spectral_decompose(alpha, kEigenTol, SpectralMode::normal);
    const SpectralCluster* one = cluster_at(da, Complex{1.0, 0.0});
    if (one == nullptr) throw Error("kato_structure_check: alpha_S^tau has no eigenvalue 1");
    const Superoperator p0(one->projection);
    const Superoperator t_prime = -(second_order_term(model, tau) * alpha);

    const Superoperator m = p0 * t_prime * p0;
    const SpectralDecomposition dm = spectral_decompose(m, kEigenTol, SpectralMode::general);
    const SpectralCluster* zero = cluster_at(dm, Complex{0.0, 0.0});
    const Superoperator q = zero ? Superoperator(zero->projection) : Superoperator::zero(n);
    const Superoperator p0q = p0 * q;

    std::vector<Superoperator> ps;
    for (double e : eps_list) ps.push_back(limit_projection(reduced_map_T(model, std::sqrt(e), tau)).projection);
    const std::size_t last = eps_list.size() - 1;
    const double e1 = eps_list[last - 1], e2 = eps_list[last];
    const Superoperator p_plus = ps[last] + (e2 / (e1 - e2)) * (ps[last] - ps[last - 1]);

    KatoReport r{p0, t_prime, q, p0q, p_plus, eps_list, {}, {}, {}, {}, 0, 0, 0, 0, 0, true, true, {}};
    r.commutator_residual = superop_norm(q * p0 - p0 * q);
    r.idempotence_residual = superop_norm(p0q * p0q - p0q);
    r.sub_left_residual = superop_norm(p0q * p_plus - p_plus);
    r.sub_right_residual = superop_norm(p_plus * p0q - p_plus);
    r.trace_p0_plus = p_plus.matrix().trace().real();
    for (std::size_t i = 0; i < ps.size(); ++i) r.distances.push_back(superop_norm(ps[i] - p_plus));
    for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
        r.differences.push_back(superop_norm(ps[i] - ps[i + 1]));
        r.eps_ratios.push_back(eps_list[i] / eps_list[i + 1]);
        if (r.distances[i] <= kFlat && r.distances[i + 1] <= kFlat) {
            // P(eps) constant along the sweep
            r.ratios.push_back(r.eps_ratios.back());
            continue;
        }
        r.ratios.push_back(r.distances[i + 1] > 0.0 ? r.distances[i] / r.distances[i + 1]
                                                    : std::numeric_limits<double>::infinity());
        const double rel = r.ratios.back() / r.eps_ratios.back();
        if (!(rel >= 0.5 && rel <= 2.0)) r.rate_consistent = false;
    }
    for (std::size_t i = 0; i + 1 < r.differences.size(); ++i)
        if (!(r.differences[i + 1] <= r.differences[i] + kFlat)) r.stable = false;

    std::ostringstream os;
    if (!r.stable) {
        os << "extrapolation unstable: differences";
        for (double d : r.differences) os << ' ' << d;
        os << "; ";
    }
    if (!r.rate_consistent) {
        os << "distance ratios";
        for (double x : r.ratios) os << ' ' << x;
        os << " inconsistent with eps ratios";
        for (double x : r.eps_ratios) os << ' ' << x;
    }
    r.diagnostics = os.str();
    return r;
}

ParametrizedReport parametrized_tau_experiment(const RISModel& model, int n_odd, const std::vector<double>& eps_list,
                                               int jobs) {
    if (n_odd < 1 || n_odd % 2 == 0) throw InputError("n_odd must be an odd integer >= 1");
    if (eps_list.empty()) throw InputError("eps list must be non-empty");
    ParametrizedReport out{n_odd, std::vector<ParametrizedRow>(eps_list.size()), {}, {}};
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        const double e = eps_list[i];
        if (!std::isfinite(e) || e <= 0.0) throw InputError("eps values must be finite and > 0");
        const double tau = std::pow(e, n_odd);
        const double lambda = std::pow(e, 0.5 * (1 - n_odd));
        if (!(lambda <= kMaxCoupling) || !(tau >= kMinDuration)) {
            std::ostringstream os;
            os << "eps = " << e << " gives lambda = " << lambda << ", tau = " << tau << " beyond the cost guard";
            throw CostGuardError(os.str());
        }
        out.rows[i] = {e, lambda, tau, 0.0};
    }
    const EffectiveState eff = effective_asymptotic_state(effective_generator_fast_repetition(model));
    if (!eff.rank_one) throw NoAsymptoticStateError("fast-repetition effective dynamics has no unique asymptotic state");
    out.effective_state = eff.state;
    parallel_for(out.rows.size(), jobs, [&](std::size_t i) {
        auto& row = out.rows[i];
        const auto [lp, rho] = unique_fixed_state(reduced_map_T(model, row.lambda, row.tau));
        row.distance = trace_distance(rho, eff.state);
    });
    for (std::size_t i = 0; i + 1 < out.rows.size(); ++i) {
        const double next = out.rows[i + 1].distance;
        out.ratios.push_back(next > 0.0 ? out.rows[i].distance / next : std::numeric_limits<double>::infinity());
    }
    return out;
}

} // namespace risim
