// config.cpp — JSON schema for experiment configurations

#include "risim/config.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "risim/errors.hpp"

namespace risim {

using nlohmann::json;

namespace {

const std::vector<std::pair<Experiment, std::string>>& experiment_table() {
    static const std::vector<std::pair<Experiment, std::string>> table = {
        {Experiment::effective, "effective"},       {Experiment::converge_lambda, "converge-lambda"},
        {Experiment::converge_tau, "converge-tau"}, {Experiment::asymptotic, "asymptotic"},
        {Experiment::kato, "kato"},                 {Experiment::dyson_check, "dyson-check"},
        {Experiment::spin_oracle, "spin-oracle"},
    };
    return table;
}

std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }
std::string at_key(const std::string& path, const std::string& key) { return path + "." + key; }

double get_real(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "number must be finite");
    return x;
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<int>();
}

Complex get_complex(const json& j, const std::string& path) {
    if (j.is_number()) return {get_real(j, path), 0.0};
    if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected a number or a [re, im] pair");
    return {get_real(j[0], at_index(path, 0)), get_real(j[1], at_index(path, 1))};
}

ComplexMatrix get_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of rows");
    const std::size_t n = j.size();
    ComplexMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const std::string rp = at_index(path, r);
        if (!j[r].is_array() || j[r].size() != n) throw ConfigError(rp, "expected a row of length " + std::to_string(n));
        for (std::size_t c = 0; c < n; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = get_complex(j[r][c], at_index(rp, c));
        }
    }
    return m;
}

void require_hermitian(const ComplexMatrix& m, const std::string& path) {
    if (!is_hermitian(m)) {
        std::ostringstream os;
        os << "matrix is not Hermitian (max asymmetry " << hermitian_asymmetry(m) << ")";
        throw ConfigError(path, os.str());
    }
}

std::vector<double> get_real_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array");
    if (j.empty()) throw ConfigError(path, "grid must be non-empty");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_real(j[i], at_index(path, i)));
    return out;
}

void require_positive(const std::vector<double>& xs, const std::string& path) {
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (!(xs[i] > 0.0)) throw ConfigError(at_index(path, i), "value must be > 0");
}

void require_decreasing(const std::vector<double>& xs, const std::string& path) {
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] < xs[i - 1])) throw ConfigError(at_index(path, i), "values must be strictly decreasing");
}

// Reads an optional key; `fallback` is used (and echoed) when absent.
template <class T, class Reader>
T optional_field(const json& obj, const std::string& path, const std::string& key, T fallback, Reader read) {
    if (!obj.contains(key)) return fallback;
    return read(obj.at(key), at_key(path, key));
}

const std::vector<std::string> kCommonKeys = {"model", "experiment", "tolerances", "output", "jobs"};

void reject_unknown(const json& obj, const std::string& path, const std::vector<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const auto& a : allowed) ok = ok || a == it.key();
        if (!ok) throw ConfigError(at_key(path, it.key()), "unknown key");
    }
}

SpinParams parse_spin(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    reject_unknown(j, path, {"S", "E", "beta", "a", "b", "c", "d", "tau"});
    for (const char* key : {"S", "E", "beta"})
        if (!j.contains(key)) throw ConfigError(at_key(path, key), "missing required field");
    SpinParams p;
    p.S = get_real(j.at("S"), at_key(path, "S"));
    p.E = get_real(j.at("E"), at_key(path, "E"));
    p.beta = get_real(j.at("beta"), at_key(path, "beta"));
    if (p.beta < 0.0) throw ConfigError(at_key(path, "beta"), "beta must be >= 0");
    const Complex zero{0.0, 0.0};
    p.a = optional_field(j, path, "a", zero, get_complex);
    p.b = optional_field(j, path, "b", zero, get_complex);
    p.c = optional_field(j, path, "c", zero, get_complex);
    p.d = optional_field(j, path, "d", zero, get_complex);
    p.tau = optional_field(j, path, "tau", 1.0, get_real);
    if (!(p.tau > 0.0)) throw ConfigError(at_key(path, "tau"), "tau must be > 0");
    return p;
}

json spin_echo(const SpinParams& p) {
    return json{{"S", p.S},
                {"E", p.E},
                {"beta", p.beta},
                {"a", complex_to_json(p.a)},
                {"b", complex_to_json(p.b)},
                {"c", complex_to_json(p.c)},
                {"d", complex_to_json(p.d)},
                {"tau", p.tau}};
}

void check_cap(int full_dim, const std::string& path) {
    const int cap = dimension_cap();
    if (full_dim > cap) {
        throw ConfigError(path, "n_S * n_E = " + std::to_string(full_dim) + " exceeds the dimension cap " +
                                    std::to_string(cap) + " (set RIS_MAX_DIM to raise it)");
    }
}

} // namespace

const char* experiment_name(Experiment e) {
    for (const auto& [k, name] : experiment_table())
        if (k == e) return name.c_str();
    return "unknown";
}

std::optional<Experiment> parse_experiment_name(const std::string& name) {
    for (const auto& [k, n] : experiment_table())
        if (n == name) return k;
    return std::nullopt;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& e : experiment_table()) v.push_back(e.second);
        return v;
    }();
    return names;
}

int dimension_cap() {
    const char* env = std::getenv("RIS_MAX_DIM");
    if (env == nullptr || *env == '\0') return kDefaultDimCap;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("RIS_MAX_DIM", "expected a positive integer");
    return static_cast<int>(std::min<long>(v, kMaxFullDim));
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("$", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("$", "expected a JSON object");
    ExperimentConfig cfg;
    json echo = json::object();

    // experiment
    if (!doc.contains("experiment")) throw ConfigError("$.experiment", "missing required field");
    if (!doc.at("experiment").is_string()) throw ConfigError("$.experiment", "expected a string");
    const std::string name = doc.at("experiment").get<std::string>();
    const auto exp = parse_experiment_name(name);
    if (!exp) throw ConfigError("$.experiment", "unknown experiment '" + name + "'");
    cfg.experiment = *exp;
    echo["experiment"] = name;

    // model
    if (!doc.contains("model")) throw ConfigError("$.model", "missing required field");
    const json& m = doc.at("model");
    if (!m.is_object() || m.size() != 1 || !(m.contains("spin") || m.contains("inline"))) {
        throw ConfigError("$.model", "expected exactly one of {\"spin\": {...}} or {\"inline\": {...}}");
    }
    try {
        if (m.contains("spin")) {
            cfg.spin = parse_spin(m.at("spin"), "$.model.spin");
            cfg.model = build_spin_model(*cfg.spin);
            echo["model"] = json{{"spin", spin_echo(*cfg.spin)}};
        } else {
            const json& in = m.at("inline");
            const std::string path = "$.model.inline";
            if (!in.is_object()) throw ConfigError(path, "expected an object");
            reject_unknown(in, path, {"h_S", "h_E", "v", "beta", "p0"});
            for (const char* key : {"h_S", "h_E", "v", "beta"})
                if (!in.contains(key)) throw ConfigError(at_key(path, key), "missing required field");
            const ComplexMatrix h_S = get_matrix(in.at("h_S"), at_key(path, "h_S"));
            const ComplexMatrix h_E = get_matrix(in.at("h_E"), at_key(path, "h_E"));
            const ComplexMatrix v = get_matrix(in.at("v"), at_key(path, "v"));
            require_hermitian(h_S, at_key(path, "h_S"));
            require_hermitian(h_E, at_key(path, "h_E"));
            require_hermitian(v, at_key(path, "v"));
            check_cap(static_cast<int>(h_S.rows() * h_E.rows()), path);
            if (v.rows() != h_S.rows() * h_E.rows()) {
                throw ConfigError(at_key(path, "v"), "dimension must equal n_S * n_E");
            }
            const double beta = get_real(in.at("beta"), at_key(path, "beta"));
            if (beta < 0.0) throw ConfigError(at_key(path, "beta"), "beta must be >= 0");
            std::optional<ComplexMatrix> p0;
            if (in.contains("p0")) p0 = get_matrix(in.at("p0"), at_key(path, "p0"));
            try {
                cfg.model = RISModel(h_S, h_E, v, beta, p0);
            } catch (const InputError& e) {
                throw ConfigError(path, e.what());
            }
            json me{{"h_S", matrix_to_json(h_S)}, {"h_E", matrix_to_json(h_E)}, {"v", matrix_to_json(v)}, {"beta", beta}};
            if (p0) me["p0"] = matrix_to_json(*p0);
            echo["model"] = json{{"inline", me}};
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const InputError& e) {
        throw ConfigError("$.model", e.what());
    }
    check_cap(cfg.model->full_dim(), "$.model");

    // tolerances
    if (doc.contains("tolerances")) {
        const json& t = doc.at("tolerances");
        const std::string path = "$.tolerances";
        if (!t.is_object()) throw ConfigError(path, "expected an object");
        reject_unknown(t, path, {"oracle", "quadrature", "structure", "sub_projection"});
        cfg.tolerances.oracle = optional_field(t, path, "oracle", cfg.tolerances.oracle, get_real);
        cfg.tolerances.quadrature = optional_field(t, path, "quadrature", cfg.tolerances.quadrature, get_real);
        cfg.tolerances.structure = optional_field(t, path, "structure", cfg.tolerances.structure, get_real);
        cfg.tolerances.sub_projection =
            optional_field(t, path, "sub_projection", cfg.tolerances.sub_projection, get_real);
        for (auto it = t.begin(); it != t.end(); ++it)
            if (!(it.value().get<double>() > 0.0)) throw ConfigError(at_key(path, it.key()), "tolerance must be > 0");
    }
    echo["tolerances"] = json{{"oracle", cfg.tolerances.oracle},
                              {"quadrature", cfg.tolerances.quadrature},
                              {"structure", cfg.tolerances.structure},
                              {"sub_projection", cfg.tolerances.sub_projection}};

    cfg.output = optional_field(doc, "$", "output", std::string{}, [](const json& j, const std::string& p) {
        if (!j.is_string()) throw ConfigError(p, "expected a string");
        return j.get<std::string>();
    });
    if (cfg.output.empty()) cfg.output = name + ".csv";
    echo["output"] = cfg.output;
    cfg.jobs = optional_field(doc, "$", "jobs", 1, get_int);
    if (cfg.jobs < 1) throw ConfigError("$.jobs", "jobs must be >= 1");
    echo["jobs"] = cfg.jobs;

    // experiment parameters
    const double default_tau = cfg.spin ? cfg.spin->tau : 1.0;
    auto read_tau = [&] {
        cfg.tau = optional_field(doc, "$", "tau", default_tau, get_real);
        if (!(cfg.tau > 0.0)) throw ConfigError("$.tau", "tau must be > 0");
        echo["tau"] = cfg.tau;
    };
    auto read_lambdas = [&](std::vector<double> fallback, bool decreasing) {
        cfg.lambdas = optional_field(doc, "$", "lambdas", std::move(fallback), get_real_list);
        require_positive(cfg.lambdas, "$.lambdas");
        if (decreasing) require_decreasing(cfg.lambdas, "$.lambdas");
        echo["lambdas"] = cfg.lambdas;
    };
    auto read_grid = [&] {
        cfg.s_max = optional_field(doc, "$", "s_max", 5.0, get_real);
        if (cfg.s_max < 0.0) throw ConfigError("$.s_max", "s_max must be >= 0");
        cfg.s_steps = optional_field(doc, "$", "s_steps", 50, get_int);
        if (cfg.s_steps < 2) throw ConfigError("$.s_steps", "s_steps must be >= 2");
        echo["s_max"] = cfg.s_max;
        echo["s_steps"] = cfg.s_steps;
    };
    auto read_cut = [&] {
        if (doc.contains("branch_cut_angle") && !doc.at("branch_cut_angle").is_null()) {
            const double c = get_real(doc.at("branch_cut_angle"), "$.branch_cut_angle");
            if (!(c > -kPi && c <= kPi)) throw ConfigError("$.branch_cut_angle", "angle must lie in (-pi, pi]");
            cfg.branch_cut_angle = c;
            echo["branch_cut_angle"] = c;
        } else {
            echo["branch_cut_angle"] = nullptr; // largest-gap bisector
        }
    };

    std::vector<std::string> allowed = kCommonKeys;
    auto allow = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys) allowed.emplace_back(k);
    };

    switch (cfg.experiment) {
    case Experiment::effective: {
        allow({"tau", "regime", "branch_cut_angle"});
        read_tau();
        read_cut();
        cfg.regime = optional_field(doc, "$", "regime", std::string("both"), [](const json& j, const std::string& p) {
            if (!j.is_string()) throw ConfigError(p, "expected a string");
            const std::string r = j.get<std::string>();
            if (r != "both" && r != "weak-coupling" && r != "fast-repetition") {
                throw ConfigError(p, "regime must be weak-coupling, fast-repetition or both");
            }
            return r;
        });
        echo["regime"] = cfg.regime;
        break;
    }
    case Experiment::converge_lambda:
        allow({"tau", "lambdas", "s_max", "s_steps", "interpolated"});
        read_tau();
        read_lambdas({0.2, 0.1, 0.05}, true);
        read_grid();
        cfg.interpolated = optional_field(doc, "$", "interpolated", false, [](const json& j, const std::string& p) {
            if (!j.is_boolean()) throw ConfigError(p, "expected a boolean");
            return j.get<bool>();
        });
        echo["interpolated"] = cfg.interpolated;
        break;
    case Experiment::converge_tau: {
        allow({"pairs", "taus", "lambda", "s_max", "s_steps"});
        read_grid();
        if (doc.contains("pairs")) {
            if (doc.contains("taus") || doc.contains("lambda")) {
                throw ConfigError("$.pairs", "give either pairs or taus (+ lambda), not both");
            }
            const json& p = doc.at("pairs");
            if (!p.is_array()) throw ConfigError("$.pairs", "expected an array of [lambda, tau] pairs");
            if (p.empty()) throw ConfigError("$.pairs", "grid must be non-empty");
            for (std::size_t i = 0; i < p.size(); ++i) {
                const std::string ip = at_index("$.pairs", i);
                if (!p[i].is_array() || p[i].size() != 2) throw ConfigError(ip, "expected [lambda, tau]");
                const double l = get_real(p[i][0], at_index(ip, 0)), t = get_real(p[i][1], at_index(ip, 1));
                if (!(l > 0.0)) throw ConfigError(at_index(ip, 0), "lambda must be > 0");
                if (!(t > 0.0)) throw ConfigError(at_index(ip, 1), "tau must be > 0");
                if (i > 0 && !(t < cfg.pairs.back().second)) {
                    throw ConfigError(at_index(ip, 1), "taus must be strictly decreasing");
                }
                cfg.pairs.emplace_back(l, t);
            }
        } else {
            const double lambda = optional_field(doc, "$", "lambda", 1.0, get_real);
            if (!(lambda > 0.0)) throw ConfigError("$.lambda", "lambda must be > 0");
            const auto taus = optional_field(doc, "$", "taus", std::vector<double>{0.2, 0.1, 0.05}, get_real_list);
            require_positive(taus, "$.taus");
            require_decreasing(taus, "$.taus");
            for (double t : taus) cfg.pairs.emplace_back(lambda, t);
        }
        json pairs = json::array();
        for (const auto& [l, t] : cfg.pairs) pairs.push_back(json::array({l, t}));
        echo["pairs"] = pairs;
        break;
    }
    case Experiment::asymptotic:
        allow({"tau", "lambdas", "t_samples"});
        read_tau();
        read_lambdas({0.2, 0.1, 0.05}, false);
        cfg.t_samples = optional_field(doc, "$", "t_samples", std::vector<double>{0.0}, get_real_list);
        for (std::size_t i = 0; i < cfg.t_samples.size(); ++i) {
            if (!(cfg.t_samples[i] >= 0.0 && cfg.t_samples[i] < cfg.tau)) {
                throw ConfigError(at_index("$.t_samples", i), "samples must lie in [0, tau)");
            }
        }
        echo["t_samples"] = cfg.t_samples;
        break;
    case Experiment::kato:
        allow({"tau", "eps"});
        read_tau();
        cfg.eps = optional_field(doc, "$", "eps", std::vector<double>{0.04, 0.01, 0.0025}, get_real_list);
        require_positive(cfg.eps, "$.eps");
        require_decreasing(cfg.eps, "$.eps");
        if (cfg.eps.size() < 2) throw ConfigError("$.eps", "need at least two values");
        echo["eps"] = cfg.eps;
        break;
    case Experiment::dyson_check:
        allow({"lambdas", "times", "orders", "quadrature_nodes"});
        read_lambdas({0.5, 1.0}, false);
        cfg.times = optional_field(doc, "$", "times", std::vector<double>{1.0}, get_real_list);
        for (std::size_t i = 0; i < cfg.times.size(); ++i)
            if (!(cfg.times[i] >= 0.0)) throw ConfigError(at_index("$.times", i), "times must be >= 0");
        if (doc.contains("orders")) {
            const json& o = doc.at("orders");
            if (!o.is_array() || o.empty()) throw ConfigError("$.orders", "expected a non-empty array");
            for (std::size_t i = 0; i < o.size(); ++i) {
                const int n = get_int(o[i], at_index("$.orders", i));
                if (n < 1 || n > kMaxDysonOrder + 1) {
                    throw ConfigError(at_index("$.orders", i),
                                      "order must lie in [1, " + std::to_string(kMaxDysonOrder + 1) + "]");
                }
                cfg.orders.push_back(n);
            }
        } else {
            cfg.orders = {2, 3, 4};
        }
        cfg.quadrature_nodes = optional_field(doc, "$", "quadrature_nodes", 32, get_int);
        if (cfg.quadrature_nodes < 1) throw ConfigError("$.quadrature_nodes", "need at least one node");
        echo["times"] = cfg.times;
        echo["orders"] = cfg.orders;
        echo["quadrature_nodes"] = cfg.quadrature_nodes;
        break;
    case Experiment::spin_oracle:
        if (!cfg.spin) throw ConfigError("$.model", "spin-oracle needs the spin shorthand model");
        if (cfg.spin->a != Complex{0.0, 0.0} || cfg.spin->d != Complex{0.0, 0.0}) {
            throw ConfigError("$.model.spin", "spin-oracle needs a = d = 0");
        }
        break;
    }
    reject_unknown(doc, "$", allowed);
    cfg.echo = std::move(echo);
    return cfg;
}

} // namespace risim
