// runner.cpp — experiment execution and result emission

#include "risim/runner.hpp"

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "risim/asymptotics.hpp"
#include "risim/errors.hpp"
#include "risim/parallel.hpp"
#include "risim/vanhove.hpp"

namespace risim {

using nlohmann::json;

std::string format_number(double x) {
    if (!std::isfinite(x)) throw Error("non-finite value in results");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }
    Csv& cell(const std::string& s) {
        sep();
        out_ << s;
        return *this;
    }
    Csv& cell(double x) { return cell(format_number(x)); }
    Csv& cell(int x) { return cell(std::to_string(x)); }
    void end() {
        out_ << '\n';
        first_ = true;
    }
    std::string str() const { return out_.str(); }

private:
    void sep() {
        if (!first_) out_ << ',';
        first_ = false;
    }
    std::ostringstream out_;
    bool first_ = true;
};

json report_summary(const ConvergenceReport& r) {
    json sup = json::array(), ratios = json::array();
    for (const auto& [p, e] : r.sup_errors) sup.push_back({{"parameter", p}, {"sup_error", e}});
    for (const auto& d : r.decay_ratios) ratios.push_back({{"from", d.from}, {"to", d.to}, {"ratio", d.ratio}});
    return {{"regime", regime_name(r.regime)}, {"sup_errors", sup}, {"decay_ratios", ratios}};
}

RunResult run_effective(const ExperimentConfig& cfg) {
    const RISModel& model = *cfg.model;
    RunResult res;
    Csv csv({"regime", "row", "col", "re", "im"});
    std::vector<EffectiveGenerator> gens;
    if (cfg.regime != "fast-repetition") gens.push_back(effective_generator_weak_coupling(model, cfg.tau, cfg.branch_cut_angle));
    if (cfg.regime != "weak-coupling") gens.push_back(effective_generator_fast_repetition(model));
    json summary = json::array();
    for (const auto& g : gens) {
        const ComplexMatrix& m = g.generator.matrix();
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                csv.cell(regime_name(g.regime)).cell(static_cast<int>(r)).cell(static_cast<int>(c));
                csv.cell(m(r, c).real()).cell(m(r, c).imag()).end();
            }
        json entry{{"regime", regime_name(g.regime)},
                   {"averaging_clusters", g.averaging_basis.clusters.size()},
                   {"unit_residual", (m * vec(ComplexMatrix::Identity(model.n_S(), model.n_S()))).norm()}};
        if (g.branch_cut_angle) entry["branch_cut_angle"] = *g.branch_cut_angle;
        summary.push_back(entry);
    }
    res.csv = csv.str();
    res.summary = {{"generators", summary}};
    return res;
}

RunResult run_convergence(const ExperimentConfig& cfg, int jobs) {
    const SweepGrid grid{cfg.s_max, cfg.s_steps};
    ConvergenceReport rep = [&] {
        if (cfg.experiment == Experiment::converge_tau) return converge_tau(*cfg.model, cfg.pairs, grid, jobs);
        if (cfg.interpolated) return converge_lambda_interpolated(*cfg.model, cfg.tau, cfg.lambdas, grid, jobs);
        return converge_lambda(*cfg.model, cfg.tau, cfg.lambdas, grid, jobs);
    }();
    Csv csv({"parameter", "s", "error"});
    for (const auto& r : rep.rows) csv.cell(r.parameter).cell(r.s).cell(r.error).end();
    RunResult res;
    res.csv = csv.str();
    res.summary = report_summary(rep);
    return res;
}

RunResult run_asymptotic(const ExperimentConfig& cfg, int jobs) {
    const RISModel& model = *cfg.model;
    const int n = model.n_S();
    const EffectiveState eff = effective_asymptotic_state(effective_generator_weak_coupling(model, cfg.tau));
    std::vector<std::optional<AsymptoticReport>> reports(cfg.lambdas.size());
    parallel_for(cfg.lambdas.size(), jobs, [&](std::size_t i) {
        reports[i] = asymptotic_periodic_state(model, cfg.lambdas[i], cfg.tau, cfg.t_samples);
    });

    std::vector<std::string> header{"lambda", "t"};
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            header.push_back("rho_" + std::to_string(k) + std::to_string(l) + "_re");
            header.push_back("rho_" + std::to_string(k) + std::to_string(l) + "_im");
        }
    header.emplace_back("trace_distance");
    Csv csv(header);
    json per_lambda = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        for (const auto& [t, rho] : reports[i]->period_samples) {
            // effective prediction at t: the effective state carried by the free evolution
            const ComplexMatrix pred = system_evolution(model, t).dual().apply(eff.state);
            csv.cell(cfg.lambdas[i]).cell(t);
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) csv.cell(rho(k, l).real()).cell(rho(k, l).imag());
            csv.cell(trace_distance(rho, pred)).end();
        }
        per_lambda.push_back({{"lambda", cfg.lambdas[i]},
                              {"periodicity_residual", reports[i]->periodicity_residual},
                              {"condition_number", reports[i]->condition_number},
                              {"peripheral_eigenvalues", reports[i]->peripheral_eigenvalues.size()}});
    }
    RunResult res;
    res.csv = csv.str();
    res.summary = {{"effective_rank_one", eff.rank_one}, {"lambdas", per_lambda}};
    return res;
}

RunResult run_kato(const ExperimentConfig& cfg) {
    const KatoReport r = kato_structure_check(*cfg.model, cfg.tau, cfg.eps);
    Csv csv({"quantity", "epsilon", "value"});
    auto row = [&](const char* q, double e, double v) { csv.cell(q).cell(e).cell(v).end(); };
    row("commutator_residual", 0.0, r.commutator_residual);
    row("idempotence_residual", 0.0, r.idempotence_residual);
    row("sub_projection_left_residual", 0.0, r.sub_left_residual);
    row("sub_projection_right_residual", 0.0, r.sub_right_residual);
    row("trace_p0_plus", 0.0, r.trace_p0_plus);
    for (std::size_t i = 0; i < r.eps.size(); ++i) row("distance_to_p0_plus", r.eps[i], r.distances[i]);
    for (std::size_t i = 0; i < r.differences.size(); ++i) row("successive_difference", r.eps[i + 1], r.differences[i]);
    for (std::size_t i = 0; i < r.ratios.size(); ++i) row("distance_ratio", r.eps[i + 1], r.ratios[i]);

    RunResult res;
    res.csv = csv.str();
    const Tolerances& tol = cfg.tolerances;
    auto fail_if = [&](bool bad, const std::string& what) {
        if (bad) res.failures.push_back(what);
    };
    fail_if(!(r.commutator_residual <= tol.structure), "[Q, P0] residual " + format_number(r.commutator_residual));
    fail_if(!(r.idempotence_residual <= tol.structure), "P0 Q idempotence residual " + format_number(r.idempotence_residual));
    fail_if(!(r.sub_left_residual <= tol.sub_projection), "P0 Q P(0+) != P(0+): " + format_number(r.sub_left_residual));
    fail_if(!(r.sub_right_residual <= tol.sub_projection), "P(0+) P0 Q != P(0+): " + format_number(r.sub_right_residual));
    fail_if(!r.stable || !r.rate_consistent, r.diagnostics);
    res.summary = {{"stable", r.stable}, {"rate_consistent", r.rate_consistent}, {"diagnostics", r.diagnostics}};
    return res;
}

RunResult run_dyson(const ExperimentConfig& cfg, int jobs) {
    const RISModel& model = *cfg.model;
    int max_order = 1;
    for (int o : cfg.orders) max_order = std::max(max_order, o);
    const double c_norm = superop_norm(commutator_superop(model.v()));

    struct TimeData {
        std::vector<Superoperator> block;     // k = 1 .. max_order - 1
        std::vector<double> quad_gap;         // || block_k - quadrature_k ||
        Superoperator alpha = Superoperator::identity(1);
    };
    std::vector<TimeData> per_time(cfg.times.size());
    parallel_for(cfg.times.size(), jobs, [&](std::size_t i) {
        const double t = cfg.times[i];
        TimeData d;
        d.alpha = matrix_exp(t * free_generator(model));
        for (int k = 1; k < max_order; ++k) {
            d.block.push_back(dyson_term(model, k, t));
            const Superoperator q = dyson_term_quadrature(model, k, t, cfg.quadrature_nodes);
            d.quad_gap.push_back(superop_norm(d.block.back() - q));
        }
        per_time[i] = std::move(d);
    });

    Csv csv({"order", "lambda", "t", "truncation_error", "bound", "block_vs_quadrature"});
    RunResult res;
    for (int order : cfg.orders)
        for (double lambda : cfg.lambdas)
            for (std::size_t i = 0; i < cfg.times.size(); ++i) {
                const double t = cfg.times[i];
                const TimeData& d = per_time[i];
                Superoperator trunc = Superoperator::identity(model.full_dim());
                Complex coeff{1.0, 0.0};
                double gap = 0.0;
                for (int k = 1; k < order; ++k) {
                    coeff *= Complex{0.0, lambda};
                    trunc = trunc + coeff * d.block[static_cast<std::size_t>(k - 1)];
                    gap = std::max(gap, d.quad_gap[static_cast<std::size_t>(k - 1)]);
                }
                trunc = trunc * d.alpha;
                const double err = superop_norm(interaction_dynamics(model, lambda, t) - trunc);
                const double bound = dyson_truncation_bound(order, lambda, t, c_norm);
                csv.cell(order).cell(lambda).cell(t).cell(err).cell(bound).cell(gap).end();
                const std::string where = "order " + std::to_string(order) + ", lambda " + format_number(lambda) +
                                          ", t " + format_number(t);
                if (!(err <= bound * (1.0 + 1e-12) + 1e-13)) {
                    res.failures.push_back(where + ": truncation error " + format_number(err) + " exceeds bound " +
                                           format_number(bound));
                }
                if (!(gap <= cfg.tolerances.quadrature)) {
                    res.failures.push_back(where + ": block vs quadrature gap " + format_number(gap));
                }
            }
    res.csv = csv.str();
    res.summary = {{"commutator_norm", c_norm}};
    return res;
}

RunResult run_spin_oracle(const ExperimentConfig& cfg) {
    const SpinParams& p = *cfg.spin;
    const SpinGeneratorReport g = closed_form_generator_checks(p);
    Csv csv({"quantity", "closed_form", "pipeline", "abs_diff"});
    RunResult res;
    auto row = [&](const std::string& q, double closed, double pipe) {
        const double diff = std::abs(closed - pipe);
        csv.cell(q).cell(closed).cell(pipe).cell(diff).end();
        if (!(diff <= cfg.tolerances.oracle)) res.failures.push_back(q + ": |difference| " + format_number(diff));
    };
    row("delta0", g.closed_form.delta0, g.pipeline_delta0);
    row("delta1", g.closed_form.delta1, g.pipeline_delta1);
    if (p.coupling_weight() > 0.0 && p.S != 0.0) {
        const ComplexMatrix closed = spin_asymptotic_state(p);
        const EffectiveState eff = effective_asymptotic_state(effective_generator_weak_coupling(*cfg.model, p.tau));
        row("asymptotic_rho_00", closed(0, 0).real(), eff.state(0, 0).real());
        row("asymptotic_rho_11", closed(1, 1).real(), eff.state(1, 1).real());
    }
    res.csv = csv.str();
    json off = json::array();
    for (const auto& c : g.off_diagonal) {
        off.push_back({{"tau", c.tau}, {"re_u01", c.re_u01}, {"re_u10", c.re_u10}, {"bound", c.bound},
                       {"slack", c.slack}, {"holds", c.holds}});
    }
    res.summary = {{"block_residual", g.block_residual},
                   {"diagonal_block_residual", g.diagonal_block_residual},
                   {"row_sum_residual", g.row_sum_residual},
                   {"off_diagonal", off}};
    return res;
}

} // namespace

RunResult execute(const ExperimentConfig& cfg, int jobs) {
    if (!cfg.model) throw Error("configuration has no model");
    RunResult res;
    switch (cfg.experiment) {
    case Experiment::effective: res = run_effective(cfg); break;
    case Experiment::converge_lambda:
    case Experiment::converge_tau: res = run_convergence(cfg, jobs); break;
    case Experiment::asymptotic: res = run_asymptotic(cfg, jobs); break;
    case Experiment::kato: res = run_kato(cfg); break;
    case Experiment::dyson_check: res = run_dyson(cfg, jobs); break;
    case Experiment::spin_oracle: res = run_spin_oracle(cfg); break;
    }
    res.exit_code = res.failures.empty() ? kExitOk : kExitToleranceFailure;
    return res;
}

json make_metadata(const ExperimentConfig& cfg, const RunResult& result, double wall_seconds) {
    std::ostringstream eigen;
    eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
    std::ostringstream nl;
    nl << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.' << NLOHMANN_JSON_VERSION_PATCH;
    return {{"tool", "ris"},
            {"experiment", experiment_name(cfg.experiment)},
            {"config", cfg.echo},
            {"versions", {{"risim", kVersion}, {"eigen", eigen.str()}, {"nlohmann_json", nl.str()}, {"compiler", __VERSION__}}},
            {"wall_time_seconds", wall_seconds},
            {"exit_code", result.exit_code},
            {"failures", result.failures},
            {"summary", result.summary}};
}

int run_to_files(const ExperimentConfig& cfg, const std::string& out_path, int jobs) {
    const auto start = std::chrono::steady_clock::now();
    const RunResult res = execute(cfg, jobs);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::ofstream csv(out_path, std::ios::binary);
    if (!csv) throw Error("cannot open output file " + out_path);
    csv << res.csv;
    if (!csv) throw Error("failed writing " + out_path);

    ExperimentConfig echoed = cfg;
    echoed.echo["output"] = out_path;
    echoed.echo["jobs"] = jobs;
    const std::string meta_path = out_path + ".meta.json";
    std::ofstream meta(meta_path, std::ios::binary);
    if (!meta) throw Error("cannot open metadata file " + meta_path);
    meta << make_metadata(echoed, res, wall).dump(2) << '\n';
    if (!meta) throw Error("failed writing " + meta_path);
    return res.exit_code;
}

} // namespace risim
