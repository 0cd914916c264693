#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "risim/asymptotics.hpp"
#include "risim/config.hpp"
#include "risim/errors.hpp"
#include "risim/runner.hpp"
#include "risim/spin_model.hpp"
#include "risim/vanhove.hpp"

namespace py = pybind11;
using namespace risim;

namespace {

using Matrix = ComplexMatrix;

Regime parse_regime(const std::string& name) {
    if (name == "weak-coupling") return Regime::weak_coupling;
    if (name == "fast-repetition") return Regime::fast_repetition;
    throw InputError("regime must be 'weak-coupling' or 'fast-repetition'");
}

EffectiveGenerator make_generator(const RISModel& m, const std::string& regime, std::optional<double> tau,
                                  std::optional<double> cut) {
    if (parse_regime(regime) == Regime::fast_repetition) return effective_generator_fast_repetition(m);
    if (!tau) throw InputError("the weak-coupling generator needs tau");
    return effective_generator_weak_coupling(m, *tau, cut);
}

py::dict report_dict(const ConvergenceReport& r) {
    py::list rows;
    for (const auto& row : r.rows) rows.append(py::make_tuple(row.parameter, row.s, row.error));
    py::list ratios;
    for (const auto& d : r.decay_ratios) ratios.append(py::make_tuple(d.from, d.to, d.ratio));
    py::dict out;
    out["regime"] = regime_name(r.regime);
    out["rows"] = rows;
    out["sup_errors"] = r.sup_errors;
    out["decay_ratios"] = ratios;
    return out;
}

} // namespace

PYBIND11_MODULE(_risim, m) {
    m.doc() = "Repeated interaction systems: reduced dynamics, van Hove generators, asymptotic states";
    m.attr("__version__") = kVersion;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<BranchCutError>(m, "BranchCutError", base.ptr());
    py::register_exception<DefectError>(m, "DefectError", base.ptr());
    py::register_exception<NoAsymptoticStateError>(m, "NoAsymptoticStateError", base.ptr());
    py::register_exception<CostGuardError>(m, "CostGuardError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<RISModel>(m, "RISModel")
        .def(py::init<Matrix, Matrix, Matrix, double, std::optional<Matrix>>(), py::arg("h_S"), py::arg("h_E"),
             py::arg("v"), py::arg("beta"), py::arg("p0") = std::nullopt)
        .def_property_readonly("h_S", &RISModel::h_S)
        .def_property_readonly("h_E", &RISModel::h_E)
        .def_property_readonly("v", &RISModel::v)
        .def_property_readonly("beta", &RISModel::beta)
        .def_property_readonly("p0", &RISModel::p0)
        .def_property_readonly("n_S", &RISModel::n_S)
        .def_property_readonly("n_E", &RISModel::n_E);

    py::class_<SpinParams>(m, "SpinParams")
        .def(py::init<>())
        .def(py::init([](double S, double E, double beta, Complex a, Complex b, Complex c, Complex d, double tau) {
                 return SpinParams{S, E, beta, a, b, c, d, tau};
             }),
             py::arg("S") = 1.0, py::arg("E") = 2.0, py::arg("beta") = 1.0, py::arg("a") = Complex{},
             py::arg("b") = Complex{1.0, 0.0}, py::arg("c") = Complex{1.0, 0.0}, py::arg("d") = Complex{},
             py::arg("tau") = 1.0)
        .def_readwrite("S", &SpinParams::S)
        .def_readwrite("E", &SpinParams::E)
        .def_readwrite("beta", &SpinParams::beta)
        .def_readwrite("a", &SpinParams::a)
        .def_readwrite("b", &SpinParams::b)
        .def_readwrite("c", &SpinParams::c)
        .def_readwrite("d", &SpinParams::d)
        .def_readwrite("tau", &SpinParams::tau);

    m.def("build_spin_model", &build_spin_model, py::arg("params"));
    m.def(
        "closed_form_deltas",
        [](const SpinParams& p) {
            const SpinDeltas d = closed_form_deltas(p);
            return py::make_tuple(d.delta0, d.delta1);
        },
        py::arg("params"));
    m.def("spin_asymptotic_state", &spin_asymptotic_state, py::arg("params"));

    // Superoperators cross the boundary as their n^2 x n^2 matrices (row-major vec).
    m.def("gibbs_state", [](const Matrix& h, double beta) { return gibbs_state(h, beta).rho; }, py::arg("h"),
          py::arg("beta"));
    m.def("system_evolution", [](const RISModel& md, double t) { return system_evolution(md, t).matrix(); },
          py::arg("model"), py::arg("t"));
    m.def(
        "interaction_dynamics",
        [](const RISModel& md, double lambda, double t) { return interaction_dynamics(md, lambda, t).matrix(); },
        py::arg("model"), py::arg("lam"), py::arg("t"));
    m.def(
        "reduced_map",
        [](const RISModel& md, double lambda, double tau) { return reduced_map_T(md, lambda, tau).matrix(); },
        py::arg("model"), py::arg("lam"), py::arg("tau"));
    m.def(
        "restricted_dynamics",
        [](const RISModel& md, double lambda, double tau, double t) {
            return restricted_dynamics(md, lambda, tau, t).matrix();
        },
        py::arg("model"), py::arg("lam"), py::arg("tau"), py::arg("t"));
    m.def("choi_matrix", [](const Matrix& s) { return choi_matrix(Superoperator(s)); }, py::arg("superop"));
    m.def(
        "check_H1",
        [](const RISModel& md) {
            const H1Report r = check_H1(md);
            py::dict out;
            out["applicable"] = r.applicable;
            out["holds"] = r.holds;
            out["coupling_residual"] = r.coupling_residual;
            out["diagnostics"] = r.diagnostics;
            return out;
        },
        py::arg("model"));

    m.def(
        "effective_generator",
        [](const RISModel& md, const std::string& regime, std::optional<double> tau, std::optional<double> cut) {
            return make_generator(md, regime, tau, cut).generator.matrix();
        },
        py::arg("model"), py::arg("regime") = "weak-coupling", py::arg("tau") = std::nullopt,
        py::arg("branch_cut_angle") = std::nullopt);
    m.def(
        "effective_asymptotic_state",
        [](const RISModel& md, const std::string& regime, std::optional<double> tau) {
            const EffectiveState s = effective_asymptotic_state(make_generator(md, regime, tau, std::nullopt));
            return py::make_tuple(s.state, s.rank_one);
        },
        py::arg("model"), py::arg("regime") = "weak-coupling", py::arg("tau") = std::nullopt);
    m.def(
        "asymptotic_state",
        [](const RISModel& md, double lambda, double tau) {
            return asymptotic_periodic_state(md, lambda, tau).asymptotic_density;
        },
        py::arg("model"), py::arg("lam"), py::arg("tau"));

    m.def(
        "converge_lambda",
        [](const RISModel& md, double tau, const std::vector<double>& lambdas, double s_max, int s_steps,
           bool interpolated, int jobs) {
            ConvergenceReport r;
            {
                py::gil_scoped_release release;
                const SweepGrid grid{s_max, s_steps};
                r = interpolated ? converge_lambda_interpolated(md, tau, lambdas, grid, jobs)
                                 : converge_lambda(md, tau, lambdas, grid, jobs);
            }
            return report_dict(r);
        },
        py::arg("model"), py::arg("tau"), py::arg("lambdas"), py::arg("s_max") = 5.0, py::arg("s_steps") = 50,
        py::arg("interpolated") = false, py::arg("jobs") = 1);
    m.def(
        "converge_tau",
        [](const RISModel& md, const std::vector<std::pair<double, double>>& pairs, double s_max, int s_steps,
           int jobs) {
            ConvergenceReport r;
            {
                py::gil_scoped_release release;
                r = converge_tau(md, pairs, SweepGrid{s_max, s_steps}, jobs);
            }
            return report_dict(r);
        },
        py::arg("model"), py::arg("pairs"), py::arg("s_max") = 5.0, py::arg("s_steps") = 50, py::arg("jobs") = 1);

    m.def(
        "run_config",
        [](const std::string& text, int jobs) {
            const ExperimentConfig cfg = parse_config(text);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = execute(cfg, jobs);
            }
            return py::make_tuple(r.exit_code, r.csv, r.summary.dump());
        },
        py::arg("config_json"), py::arg("jobs") = 1,
        "Runs an experiment config in memory; returns (exit_code, csv_text, summary_json).");
}
