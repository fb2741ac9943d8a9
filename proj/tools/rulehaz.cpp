// Command-line front end. Talks to the library only through rulehaz.h.
#include "rulehaz/rulehaz.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using nlohmann::json;

struct Failure {
    int code;
};

void check(int status) {
    if (status != RULEHAZ_OK) {
        std::cerr << "error: " << rulehaz_last_error() << "\n";
        throw Failure{status};
    }
}

void usage_error(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    throw Failure{RULEHAZ_USAGE_ERROR};
}

// Owns a string returned by the library.
struct Text {
    char* p = nullptr;
    ~Text() { rulehaz_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        throw Failure{RULEHAZ_DATA_ERROR};
    }
    out << text;
}

struct FitFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trees;
    std::optional<double> mean_depth;
    std::optional<double> shrinkage;
    std::optional<double> subsample;
    std::optional<std::string> lambda;
    std::optional<std::size_t> cv_folds;
    std::optional<double> winsor_q;

    void add(CLI::App* app) {
        app->add_option("--seed", seed, "Random seed (boosting subsamples and CV folds)");
        app->add_option("--trees", trees, "Number of boosted trees M (default 500)");
        app->add_option("--mean-depth", mean_depth, "Average tree size L, in terminal nodes (default 2)");
        app->add_option("--shrinkage", shrinkage, "Boosting learning rate (default 0.01)");
        app->add_option("--subsample", subsample, "Rows per tree: fraction in (0,1) or a count (default rule)");
        app->add_option("--lambda", lambda, "Fix lambda (number or \"max\") instead of cross-validating");
        app->add_option("--cv-folds", cv_folds, "Cross-validation folds (default 5)");
        app->add_option("--winsor-q", winsor_q, "Winsorizing quantile for linear terms (default 0.025)");
    }

    json to_json() const {
        json j = json::object();
        if (seed) j["seed"] = *seed;
        if (trees) j["trees"] = *trees;
        if (mean_depth) j["mean_depth"] = *mean_depth;
        if (shrinkage) j["shrinkage"] = *shrinkage;
        if (subsample) j["subsample"] = *subsample;
        if (cv_folds) j["cv_folds"] = *cv_folds;
        if (winsor_q) j["winsor_q"] = *winsor_q;
        if (lambda) {
            if (*lambda == "max") {
                j["lambda"] = "max";
            } else {
                try {
                    std::size_t used = 0;
                    const double v = std::stod(*lambda, &used);
                    if (used != lambda->size()) throw std::invalid_argument("trailing characters");
                    j["lambda"] = v;
                } catch (const std::exception&) {
                    usage_error("--lambda takes a number or \"max\"");
                }
            }
        }
        return j;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"Rule-ensemble estimation of heterogeneous treatment effects on survival data"};
    app.require_subcommand(1);
    std::optional<std::size_t> threads;
    app.add_option("--threads", threads, "Worker thread cap (default: RULEHAZ_THREADS or all cores)");

    std::string data, model, out, scenario;
    std::optional<double> t0;
    std::optional<std::size_t> n, replications;
    FitFlags fit_flags;

    auto* fit = app.add_subcommand("fit", "Fit a model to a survival CSV (time, event, treatment, covariates)");
    fit->add_option("--data", data, "Training CSV")->required();
    fit->add_option("--model", model, "Where to write the model JSON")->required();
    fit->add_option("--out", out, "Optional path for the fit diagnostics JSON");
    fit_flags.add(fit);

    auto* predict = app.add_subcommand("predict", "Estimate S1, S0 and the HTE at t0 for a covariate CSV");
    predict->add_option("--model", model, "Model JSON")->required();
    predict->add_option("--data", data, "Covariate CSV")->required();
    predict->add_option("--t0", t0, "Horizon (default: 90th percentile of training times)");
    predict->add_option("--out", out, "Output CSV (default: stdout)");

    auto* report = app.add_subcommand("report", "Rule and variable importance tables");
    report->add_option("--model", model, "Model JSON")->required();
    report->add_option("--data", data, "CSV used for rule supports and importances")->required();
    report->add_option("--out", out, "Directory for report.txt, report.json and CSV tables");

    auto* simulate = app.add_subcommand("simulate", "Generate a scenario dataset or run the benchmark");
    simulate->add_option("--scenario", scenario, "M1xT1 ... M3xT3, optional -null suffix; \"all\" for benchmarks")
        ->required();
    simulate->add_option("--n", n, "Rows per simulated set (default 1000)");
    simulate->add_option("--seed", fit_flags.seed, "Random seed");
    simulate->add_option("--t0", t0, "Benchmark horizon (default 2)");
    simulate->add_option("--replications", replications, "Run the benchmark with this many replications");
    simulate->add_option("--out", out, "Output directory")->required();
    simulate->add_option("--trees", fit_flags.trees, "Number of boosted trees for benchmark fits");
    simulate->add_option("--mean-depth", fit_flags.mean_depth, "Average tree size for benchmark fits");
    simulate->add_option("--shrinkage", fit_flags.shrinkage, "Learning rate for benchmark fits");
    simulate->add_option("--subsample", fit_flags.subsample, "Rows per tree for benchmark fits");
    simulate->add_option("--lambda", fit_flags.lambda, "Fixed lambda for benchmark fits");
    simulate->add_option("--cv-folds", fit_flags.cv_folds, "CV folds for benchmark fits");
    simulate->add_option("--winsor-q", fit_flags.winsor_q, "Winsorizing quantile for benchmark fits");

    auto* truth = app.add_subcommand("truth", "Oracle HTE for the rows of a covariate CSV (x1..x15)");
    truth->add_option("--scenario", scenario, "Scenario name")->required();
    truth->add_option("--data", data, "Covariate CSV")->required();
    truth->add_option("--t0", t0, "Horizon (default 2)");
    truth->add_option("--seed", fit_flags.seed, "Oracle seed");
    truth->add_option("--out", out, "Output CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return RULEHAZ_USAGE_ERROR;
    }

    if (threads) check(rulehaz_set_threads(*threads));

    if (fit->parsed()) {
        rulehaz_dataset* d = nullptr;
        check(rulehaz_dataset_load_csv(data.c_str(), &d));
        rulehaz_model* m = nullptr;
        const std::string config = fit_flags.to_json().dump();
        const int status = rulehaz_fit(d, config.c_str(), &m);
        rulehaz_dataset_free(d);
        check(status);
        const int saved = rulehaz_model_save(m, model.c_str());
        Text text;
        const int dumped = out.empty() ? RULEHAZ_OK : rulehaz_model_to_json(m, &text.p);
        rulehaz_model_free(m);
        check(saved);
        check(dumped);
        if (!out.empty()) emit(json::parse(text.str()).at("fit_report").dump(2) + "\n", out);
        return 0;
    }

    if (predict->parsed()) {
        if (t0 && !(*t0 > 0.0)) usage_error("--t0 must be positive");
        rulehaz_model* m = nullptr;
        check(rulehaz_model_load(model.c_str(), &m));
        Text text;
        const int status = rulehaz_predict_csv(m, data.c_str(), t0.value_or(0.0), &text.p);
        rulehaz_model_free(m);
        check(status);
        emit(text.str(), out);
        return 0;
    }

    if (report->parsed()) {
        rulehaz_model* m = nullptr;
        check(rulehaz_model_load(model.c_str(), &m));
        rulehaz_dataset* d = nullptr;
        int status = rulehaz_dataset_load_csv(data.c_str(), &d);
        if (status != RULEHAZ_OK) {
            rulehaz_model_free(m);
            check(status);
        }
        const char* formats[] = {"text", "json", "rules_csv", "linear_csv", "variables_csv"};
        const char* files[] = {"report.txt", "report.json", "rules.csv", "linear_terms.csv", "variables.csv"};
        std::string printed;
        for (int k = 0; k < 5 && status == RULEHAZ_OK; ++k) {
            if (out.empty() && k > 0) break;
            Text text;
            status = rulehaz_report(m, d, formats[k], &text.p);
            if (status != RULEHAZ_OK) break;
            if (out.empty()) {
                printed = text.str();
            } else {
                std::filesystem::create_directories(out);
                emit(text.str(), (std::filesystem::path(out) / files[k]).string());
            }
        }
        rulehaz_dataset_free(d);
        rulehaz_model_free(m);
        check(status);
        if (out.empty()) std::cout << printed;
        return 0;
    }

    if (simulate->parsed()) {
        std::filesystem::create_directories(out);
        const auto dir = std::filesystem::path(out);
        if (replications) {
            json config = {{"scenarios", scenario}, {"replications", *replications}};
            if (fit_flags.seed) config["seed"] = *fit_flags.seed;
            if (n) config["n"] = *n;
            if (t0) config["t0"] = *t0;
            json fit_config = fit_flags.to_json();
            fit_config.erase("seed");  // per-replication seeds derive from the benchmark seed
            config["fit"] = fit_config;
            Text csv, summary;
            check(rulehaz_benchmark(config.dump().c_str(), &csv.p, &summary.p));
            emit(csv.str(), (dir / "benchmark.csv").string());
            emit(summary.str(), (dir / "summary.json").string());
            return 0;
        }
        json spec = {{"scenario", scenario}};
        if (n) spec["n"] = *n;
        if (fit_flags.seed) spec["seed"] = *fit_flags.seed;
        if (t0) spec["t0"] = *t0;
        rulehaz_dataset* d = nullptr;
        Text meta;
        check(rulehaz_simulate(spec.dump().c_str(), &d, &meta.p));
        const int status = rulehaz_dataset_save_csv(d, (dir / "data.csv").string().c_str());
        rulehaz_dataset_free(d);
        check(status);
        emit(meta.str(), (dir / "metadata.json").string());
        return 0;
    }

    if (truth->parsed()) {
        json spec = {{"scenario", scenario}};
        if (t0) spec["t0"] = *t0;
        if (fit_flags.seed) spec["seed"] = *fit_flags.seed;
        Text text;
        check(rulehaz_truth_csv(spec.dump().c_str(), data.c_str(), &text.p));
        emit(text.str(), out);
        return 0;
    }
    return RULEHAZ_USAGE_ERROR;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Failure& f) {
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return RULEHAZ_NUMERICAL_ERROR;
    }
}
