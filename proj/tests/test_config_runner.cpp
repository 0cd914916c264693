#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "helpers.hpp"
#include "risim/config.hpp"
#include "risim/errors.hpp"
#include "risim/runner.hpp"

using namespace risim;
using nlohmann::json;

namespace {

const char* kMinimalSpin =
    R"({"model":{"spin":{"S":1,"E":2,"beta":1,"b":[1,0],"c":[1,0],"tau":1}},"experiment":"spin-oracle"})";

json spin_doc(const std::string& experiment) {
    json doc = json::parse(kMinimalSpin);
    doc["experiment"] = experiment;
    return doc;
}

std::string error_path(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

// Inline model: two-level system and chain element with a generic Hermitian coupling.
json inline_doc() {
    json v = json::array();
    for (int i = 0; i < 4; ++i) {
        json row = json::array();
        for (int j = 0; j < 4; ++j) {
            const double re = i == j ? 0.1 * (i + 1) : 0.3 / (1 + i + j);
            const double im = i == j ? 0.0 : (i < j ? 0.07 * (j - i) : -0.07 * (i - j));
            row.push_back(json::array({re, im}));
        }
        v.push_back(row);
    }
    return {{"experiment", "effective"},
            {"model",
             {{"inline",
               {{"h_S", {{0, 0}, {0, 1}}}, {"h_E", {{0, 0}, {0, 2}}}, {"v", v}, {"beta", 1.0}}}}},
            {"tau", 1.0}};
}

} // namespace

TEST_CASE("parse_config: spin shorthand") {
    const ExperimentConfig cfg = parse_config(std::string(kMinimalSpin));
    CHECK(cfg.experiment == Experiment::spin_oracle);
    REQUIRE(cfg.spin.has_value());
    CHECK(cfg.spin->S == 1.0);
    CHECK(cfg.spin->a == Complex{0.0, 0.0});
    REQUIRE(cfg.model.has_value());
    CHECK(cfg.model->n_S() == 2);
    CHECK(cfg.jobs == 1);
    CHECK(cfg.output == "spin-oracle.csv");
    // defaults are echoed
    CHECK(cfg.echo["tolerances"]["oracle"] == 1e-9);
    CHECK(cfg.echo["model"]["spin"]["tau"] == 1.0);
}

TEST_CASE("parse_config: error paths") {
    json doc = json::parse(kMinimalSpin);
    doc.erase("experiment");
    CHECK(error_path(doc) == "$.experiment");

    doc = spin_doc("no-such-thing");
    CHECK(error_path(doc) == "$.experiment");

    doc = spin_doc("spin-oracle");
    doc["model"]["spin"].erase("beta");
    CHECK(error_path(doc) == "$.model.spin.beta");

    doc = spin_doc("spin-oracle");
    doc["model"]["spin"]["zeta"] = 1;
    CHECK(error_path(doc) == "$.model.spin.zeta");

    doc = spin_doc("spin-oracle");
    doc["lambdas"] = {0.1};
    CHECK(error_path(doc) == "$.lambdas");

    doc = spin_doc("spin-oracle");
    doc["model"]["spin"]["a"] = {1, 0};
    CHECK(error_path(doc) == "$.model.spin");

    doc = spin_doc("converge-lambda");
    doc["lambdas"] = json::array();
    CHECK(error_path(doc) == "$.lambdas");
    doc["lambdas"] = {0.1, 0.2};
    CHECK(error_path(doc) == "$.lambdas[1]");

    doc = spin_doc("converge-tau");
    doc["pairs"] = {{1.0, 0.1}, {1.0, "x"}};
    CHECK(error_path(doc) == "$.pairs[1][1]");

    doc = spin_doc("asymptotic");
    doc["t_samples"] = {0.0, 1.0};
    CHECK(error_path(doc) == "$.t_samples[1]");

    doc = spin_doc("kato");
    doc["eps"] = {0.01};
    CHECK(error_path(doc) == "$.eps");

    doc = spin_doc("effective");
    doc["branch_cut_angle"] = 4.0;
    CHECK(error_path(doc) == "$.branch_cut_angle");

    doc = spin_doc("effective");
    doc["tolerances"] = {{"oracle", -1.0}};
    CHECK(error_path(doc) == "$.tolerances.oracle");

    CHECK_THROWS_AS(parse_config(std::string("{not json")), ConfigError);
}

TEST_CASE("parse_config: inline model") {
    json doc = inline_doc();
    const ExperimentConfig cfg = parse_config(doc);
    REQUIRE(cfg.model.has_value());
    CHECK(cfg.model->full_dim() == 4);
    // bit-identical round trip of the coupling through the echo
    CHECK(cfg.echo["model"]["inline"]["v"] == doc["model"]["inline"]["v"]);
    const ExperimentConfig again = parse_config(cfg.echo.dump());
    CHECK(again.model->v() == cfg.model->v());

    SUBCASE("non-Hermitian input") {
        doc["model"]["inline"]["h_S"] = {{0, 0.25}, {0, 1}};
        try {
            parse_config(doc);
            FAIL("expected a ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.path() == "$.model.inline.h_S");
            CHECK(std::string(e.what()).find("0.25") != std::string::npos);
        }
    }
    SUBCASE("dimension mismatch") {
        doc["model"]["inline"]["v"] = {{0, 0}, {0, 0}};
        CHECK(error_path(doc) == "$.model.inline.v");
    }
    SUBCASE("dimension cap") {
        json big = doc;
        const json h3 = {{0, 0, 0}, {0, 1, 0}, {0, 0, 2}};
        json v9 = json::array();
        for (int i = 0; i < 9; ++i) v9.push_back(std::vector<double>(9, 0.0));
        big["model"]["inline"]["h_S"] = h3;
        big["model"]["inline"]["h_E"] = h3;
        big["model"]["inline"]["v"] = v9;
        ::unsetenv("RIS_MAX_DIM");
        CHECK(error_path(big) == "$.model.inline");
        ::setenv("RIS_MAX_DIM", "9", 1);
        CHECK(dimension_cap() == 9);
        CHECK_NOTHROW(parse_config(big));
        ::setenv("RIS_MAX_DIM", "lots", 1);
        CHECK_THROWS_AS(dimension_cap(), ConfigError);
        ::unsetenv("RIS_MAX_DIM");
        CHECK(dimension_cap() == kDefaultDimCap);
    }
}

TEST_CASE("format_number") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(-2.0) == "-2");
    CHECK_THROWS_AS(format_number(std::nan("")), Error);
    CHECK_THROWS_AS(format_number(std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("execute: spin-oracle") {
    const RunResult r = execute(parse_config(std::string(kMinimalSpin)), 1);
    CHECK(r.exit_code == kExitOk);
    const auto rows = parse_csv(r.csv);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == std::vector<std::string>{"quantity", "closed_form", "pipeline", "abs_diff"});
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][3]) <= 1e-9);

    json doc = json::parse(kMinimalSpin);
    doc["tolerances"] = {{"oracle", 1e-30}};
    const RunResult strict = execute(parse_config(doc), 1);
    CHECK(strict.exit_code == kExitToleranceFailure);
    CHECK_FALSE(strict.failures.empty());
}

TEST_CASE("execute: converge-lambda") {
    json doc = spin_doc("converge-lambda");
    doc["lambdas"] = {0.2, 0.1};
    const ExperimentConfig cfg = parse_config(doc);
    const RunResult r = execute(cfg, 1);
    CHECK(r.exit_code == kExitOk);
    const auto rows = parse_csv(r.csv);
    CHECK(rows[0] == std::vector<std::string>{"parameter", "s", "error"});
    REQUIRE(rows.size() == 101);
    std::map<std::string, std::map<double, double>> by_s;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        by_s[rows[i][1]][std::stod(rows[i][0])] = std::stod(rows[i][2]);
        if (i > 1) {
            const double p0 = std::stod(rows[i - 1][0]), p1 = std::stod(rows[i][0]);
            const double s0 = std::stod(rows[i - 1][1]), s1 = std::stod(rows[i][1]);
            CHECK((p0 < p1 || (p0 == p1 && s0 < s1)));
        }
    }
    for (const auto& [s, errs] : by_s) {
        CAPTURE(s);
        if (std::stod(s) > 0.0) CHECK(errs.at(0.1) < errs.at(0.2));
    }
    CHECK(r.summary["sup_errors"][0]["sup_error"].get<double>() > r.summary["sup_errors"][1]["sup_error"].get<double>());

    // byte-identical output for any number of jobs
    CHECK(execute(cfg, 4).csv == r.csv);
}

TEST_CASE("execute: all experiments produce finite CSVs") {
    for (const char* name : {"effective", "converge-tau", "asymptotic", "kato", "dyson-check"}) {
        CAPTURE(name);
        const ExperimentConfig cfg = parse_config(spin_doc(name));
        const RunResult r = execute(cfg, 2);
        CHECK(r.exit_code == kExitOk);
        const auto rows = parse_csv(r.csv);
        REQUIRE(rows.size() > 1);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i].size() == rows[0].size());
            for (const auto& cell : rows[i]) {
                char* end = nullptr;
                const double x = std::strtod(cell.c_str(), &end);
                if (end != cell.c_str() && *end == '\0') CHECK(std::isfinite(x));
            }
        }
        CHECK(execute(cfg, 1).csv == r.csv);
    }
}

TEST_CASE("execute: column contracts") {
    auto header = [](const char* name) { return parse_csv(execute(parse_config(spin_doc(name)), 1).csv)[0]; };
    CHECK(header("effective") == std::vector<std::string>{"regime", "row", "col", "re", "im"});
    CHECK(header("converge-tau") == std::vector<std::string>{"parameter", "s", "error"});
    CHECK(header("kato") == std::vector<std::string>{"quantity", "epsilon", "value"});
    CHECK(header("dyson-check") ==
          std::vector<std::string>{"order", "lambda", "t", "truncation_error", "bound", "block_vs_quadrature"});
    const auto a = header("asymptotic");
    CHECK(a.front() == "lambda");
    CHECK(a[2] == "rho_00_re");
    CHECK(a.back() == "trace_distance");
    CHECK(a.size() == 11);
}

TEST_CASE("run_to_files") {
    const auto dir = std::filesystem::temp_directory_path() / "risim_runner_test";
    std::filesystem::create_directories(dir);
    const std::string out = (dir / "oracle.csv").string();
    const ExperimentConfig cfg = parse_config(std::string(kMinimalSpin));
    CHECK(run_to_files(cfg, out, 1) == kExitOk);

    std::ifstream csv(out);
    std::stringstream body;
    body << csv.rdbuf();
    CHECK(body.str() == execute(cfg, 1).csv);

    std::ifstream meta_in(out + ".meta.json");
    const json meta = json::parse(meta_in);
    CHECK(meta["experiment"] == "spin-oracle");
    CHECK(meta["exit_code"] == 0);
    json echo = cfg.echo;
    echo["output"] = out; // the sidecar records the path actually written
    CHECK(meta["config"] == echo);
    CHECK(meta["versions"]["risim"] == kVersion);
    CHECK(meta["wall_time_seconds"].get<double>() >= 0.0);
    std::filesystem::remove_all(dir);
}
