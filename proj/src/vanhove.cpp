// vanhove.cpp — effective van Hove generators and convergence sweeps

#include "risim/vanhove.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "risim/errors.hpp"
#include "risim/parallel.hpp"

namespace risim {

const char* regime_name(Regime r) {
    switch (r) {
    case Regime::weak_coupling: return "weak-coupling";
    case Regime::fast_repetition: return "fast-repetition";
    }
    return "unknown";
}

Superoperator spectral_average(const Superoperator& b, const SpectralDecomposition& basis) {
    const ComplexMatrix& m = b.matrix();
    ComplexMatrix out = ComplexMatrix::Zero(m.rows(), m.cols());
    for (const auto& c : basis.clusters) {
        if (c.projection.rows() != m.rows() || c.projection.cols() != m.cols()) {
            throw InputError("spectral_average: projection and operand dimensions differ");
        }
        out += c.projection * m * c.projection;
    }
    return Superoperator(std::move(out));
}

Superoperator log_generator_A0(const RISModel& model, double tau, std::optional<double> branch_cut_angle) {
    if (!std::isfinite(tau) || tau < 0.0) throw InputError("tau must be finite and >= 0");
    if (tau == 0.0) return Superoperator::zero(model.n_S());
    return matrix_log_unitary(system_evolution(model, tau), branch_cut_angle);
}

Superoperator second_order_term(const RISModel& model, double tau) {
    if (!std::isfinite(tau) || tau <= 0.0) throw InputError("tau must be finite and > 0");
    return conditional_expectation(model).restrict(dyson_term(model, 2, tau));
}

EffectiveGenerator effective_generator_weak_coupling(const RISModel& model, double tau,
                                                     std::optional<double> branch_cut_angle) {
    const Superoperator a0 = log_generator_A0(model, tau, branch_cut_angle);
    double cut = 0.0;
    if (branch_cut_angle) {
        cut = *branch_cut_angle;
    } else {
        Eigen::ComplexEigenSolver<ComplexMatrix> es(system_evolution(model, tau).matrix(), false);
        const ComplexVector& ev = es.eigenvalues();
        cut = largest_gap_bisector(std::span<const Complex>(ev.data(), static_cast<std::size_t>(ev.size())));
    }
    SpectralDecomposition basis = spectral_decompose(a0, 1e-8, SpectralMode::normal);
    Superoperator gen = -spectral_average(second_order_term(model, tau), basis);
    return {Regime::weak_coupling, std::move(gen), std::move(basis), cut};
}

EffectiveGenerator effective_generator_fast_repetition(const RISModel& model) {
    const Superoperator c = commutator_superop(model.v());
    const Superoperator b = conditional_expectation(model).restrict(c * c);
    SpectralDecomposition basis = spectral_decompose(system_derivation(model), 1e-8, SpectralMode::normal);
    Superoperator gen = -0.5 * spectral_average(b, basis);
    return {Regime::fast_repetition, std::move(gen), std::move(basis), std::nullopt};
}

// ---------------------------------------------------------------------------

namespace {

void check_grid(const SweepGrid& grid) {
    if (!std::isfinite(grid.s_max) || grid.s_max < 0.0) throw InputError("s_max must be finite and >= 0");
    if (grid.s_steps < 2) throw InputError("s_steps must be >= 2");
}

std::vector<double> s_values(const SweepGrid& grid) {
    std::vector<double> s(static_cast<std::size_t>(grid.s_steps));
    for (int k = 0; k < grid.s_steps; ++k) s[static_cast<std::size_t>(k)] = grid.s_max * k / (grid.s_steps - 1);
    return s;
}

void guard_iterations(double iterations) {
    if (!(iterations <= kMaxLatticeIterations)) {
        std::ostringstream os;
        os << "sweep needs " << iterations << " interaction steps (limit " << kMaxLatticeIterations << ")";
        throw CostGuardError(os.str());
    }
}

// Powers T^n for a non-decreasing sequence of n, reusing the previous power.
class PowerWalker {
public:
    explicit PowerWalker(Superoperator t) : t_(std::move(t)), current_(Superoperator::identity(t_.dim())) {}

    const Superoperator& advance_to(std::uint64_t n) {
        if (n < n_) {
            n_ = 0;
            current_ = Superoperator::identity(t_.dim());
        }
        if (n > n_) {
            current_ = current_ * t_.pow(n - n_);
            n_ = n;
        }
        return current_;
    }

private:
    Superoperator t_;
    Superoperator current_;
    std::uint64_t n_ = 0;
};

struct SweepTask {
    double parameter;
    double lambda;
    double tau;
};

// Shared engine: error(s) = || T^n R(t1) alpha_S^{-t} - e^{s G} ||, where t = s / (lambda^2 tau) * time_scale.
// lattice_only: t is rounded down to the lattice n tau and R(t1) is dropped.
ConvergenceReport sweep(const RISModel& model, const EffectiveGenerator& gen, const std::vector<SweepTask>& tasks,
                        const SweepGrid& grid, bool lattice_only, bool physical_time_over_tau, int jobs) {
    check_grid(grid);
    const std::vector<double> s = s_values(grid);
    std::vector<ComplexMatrix> target(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) target[k] = matrix_exp(s[k] * gen.generator).matrix();

    for (const auto& task : tasks) {
        // physical time t = s / lambda^2 (weak coupling) or s / (lambda^2 tau) (fast repetition)
        const double t_max = physical_time_over_tau ? grid.s_max / (task.lambda * task.lambda * task.tau)
                                                    : grid.s_max / (task.lambda * task.lambda);
        guard_iterations(t_max / task.tau);
    }

    const Superoperator delta_s = system_derivation(model);
    const ConditionalExpectation es = conditional_expectation(model);
    std::vector<std::vector<ConvergenceRow>> per_task(tasks.size());

    parallel_for(tasks.size(), jobs, [&](std::size_t i) {
        const SweepTask& task = tasks[i];
        const Superoperator gen_full = full_generator(model, task.lambda);
        PowerWalker walker(es.restrict(matrix_exp(task.tau * gen_full)));
        std::vector<ConvergenceRow> rows;
        rows.reserve(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) {
            const double t = physical_time_over_tau ? s[k] / (task.lambda * task.lambda * task.tau)
                                                    : s[k] / (task.lambda * task.lambda);
            const std::uint64_t n = lattice_floor(t / task.tau);
            const double lattice_t = static_cast<double>(n) * task.tau;
            Superoperator approx = walker.advance_to(n);
            double shift = lattice_t;
            if (!lattice_only) {
                const double t1 = std::max(0.0, t - lattice_t);
                if (t1 > 0.0) approx = approx * es.restrict(matrix_exp(t1 * gen_full));
                shift = t;
            }
            approx = approx * matrix_exp(-shift * delta_s);
            const double err = spectral_norm(approx.matrix() - target[k]);
            rows.push_back({task.parameter, s[k], err});
        }
        per_task[i] = std::move(rows);
    });

    ConvergenceReport report{gen.regime, {}, {}, {}};
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        double sup = 0.0;
        for (const auto& r : per_task[i]) {
            if (!std::isfinite(r.error)) throw Error("sweep produced a non-finite error");
            sup = std::max(sup, r.error);
            report.rows.push_back(r);
        }
        report.sup_errors.emplace_back(tasks[i].parameter, sup);
    }
    std::stable_sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
        if (a.parameter != b.parameter) return a.parameter < b.parameter;
        return a.s < b.s;
    });
    for (std::size_t i = 0; i + 1 < report.sup_errors.size(); ++i) {
        const auto& [p, e] = report.sup_errors[i];
        const auto& [q, f] = report.sup_errors[i + 1];
        report.decay_ratios.push_back({p, q, f > 0.0 ? e / f : std::numeric_limits<double>::infinity()});
    }
    return report;
}

std::vector<SweepTask> lambda_tasks(double tau, const std::vector<double>& lambdas) {
    if (!std::isfinite(tau) || tau <= 0.0) throw InputError("tau must be finite and > 0");
    if (lambdas.empty()) throw InputError("lambdas must be non-empty");
    std::vector<SweepTask> tasks;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const double l = lambdas[i];
        if (!std::isfinite(l) || l <= 0.0) throw InputError("lambdas must be finite and > 0");
        if (i > 0 && !(l < lambdas[i - 1])) throw InputError("lambdas must be strictly decreasing");
        tasks.push_back({l, l, tau});
    }
    return tasks;
}

} // namespace

ConvergenceReport converge_lambda(const RISModel& model, double tau, const std::vector<double>& lambdas,
                                  const SweepGrid& grid, int jobs) {
    const auto tasks = lambda_tasks(tau, lambdas);
    return sweep(model, effective_generator_weak_coupling(model, tau), tasks, grid, true, false, jobs);
}

ConvergenceReport converge_lambda_interpolated(const RISModel& model, double tau,
                                               const std::vector<double>& lambdas, const SweepGrid& grid,
                                               int jobs) {
    const auto tasks = lambda_tasks(tau, lambdas);
    return sweep(model, effective_generator_weak_coupling(model, tau), tasks, grid, false, false, jobs);
}

ConvergenceReport converge_tau(const RISModel& model, const std::vector<std::pair<double, double>>& pairs,
                               const SweepGrid& grid, int jobs) {
    if (pairs.empty()) throw InputError("pairs must be non-empty");
    std::vector<SweepTask> tasks;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [lambda, tau] = pairs[i];
        if (!std::isfinite(lambda) || lambda <= 0.0) throw InputError("lambda must be finite and > 0");
        if (!std::isfinite(tau) || tau <= 0.0) throw InputError("tau must be finite and > 0");
        if (i > 0 && !(tau < pairs[i - 1].second)) throw InputError("taus must be strictly decreasing");
        tasks.push_back({tau, lambda, tau});
    }
    return sweep(model, effective_generator_fast_repetition(model), tasks, grid, false, true, jobs);
}

} // namespace risim
