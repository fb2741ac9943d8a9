#include "rulehaz/rulehaz.h"

#include "rulehaz/csv.hpp"
#include "rulehaz/error.hpp"
#include "rulehaz/hte.hpp"
#include "rulehaz/interpretation.hpp"
#include "rulehaz/parallel.hpp"
#include "rulehaz/pipeline.hpp"
#include "rulehaz/serialization.hpp"
#include "rulehaz/simulation.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

struct rulehaz_dataset {
    rulehaz::SurvivalDataset data;
};

struct rulehaz_model {
    rulehaz::HteModel model;
};

namespace {

thread_local std::string last_error;

int fail(int code, const std::string& message) {
    last_error = message;
    return code;
}

// Runs f and converts any exception into a status code.
template <class F>
int guard(F&& f) {
    try {
        last_error.clear();
        f();
        return RULEHAZ_OK;
    } catch (const rulehaz::Error& e) {
        return fail(static_cast<int>(e.kind()), e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(RULEHAZ_USAGE_ERROR, std::string("invalid JSON: ") + e.what());
    } catch (const std::bad_alloc&) {
        return fail(RULEHAZ_NUMERICAL_ERROR, "out of memory");
    } catch (const std::exception& e) {
        return fail(RULEHAZ_NUMERICAL_ERROR, e.what());
    }
}

void require(const void* p, const char* what) {
    if (!p) throw rulehaz::ConfigError(std::string(what) + " must not be NULL");
}

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

nlohmann::json parse_json(const char* text) {
    if (!text || !*text) return nlohmann::json::object();
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw rulehaz::ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
}

void write_file(const char* path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw rulehaz::DataError(std::string("cannot write ") + path);
    out << text;
    if (!out) throw rulehaz::DataError(std::string("failed writing ") + path);
}

double resolve_t0(const rulehaz::HteModel& model, double t0) {
    if (t0 > 0.0) return t0;
    const auto it = model.fit_report.find("default_t0");
    if (it == model.fit_report.end() || !it->is_number()) {
        throw rulehaz::ConfigError("no t0 given and the model records no default horizon");
    }
    return it->get<double>();
}

} // namespace

extern "C" {

const char* rulehaz_version(void) { return "1.0.0"; }

const char* rulehaz_last_error(void) { return last_error.c_str(); }

void rulehaz_string_free(char* s) { std::free(s); }

int rulehaz_set_threads(size_t threads) {
    return guard([&] { rulehaz::set_thread_limit(threads); });
}

int rulehaz_dataset_create(size_t n, size_t p, const double* times, const int* events, const int* treatments,
                           const double* covariates, const char* const* names, rulehaz_dataset** out) {
    return guard([&] {
        require(out, "out");
        *out = nullptr;
        if (n > 0) {
            require(times, "times");
            require(events, "events");
            require(treatments, "treatments");
            if (p > 0) require(covariates, "covariates");
        }
        rulehaz::CovariateMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        if (n * p > 0) std::memcpy(x.data(), covariates, n * p * sizeof(double));
        std::vector<std::string> feature_names;
        if (names) {
            for (size_t j = 0; j < p; ++j) {
                require(names[j], "feature name");
                feature_names.emplace_back(names[j]);
            }
        }
        auto data = rulehaz::make_dataset(std::vector<double>(times, times + n), std::vector<int>(events, events + n),
                                          std::vector<int>(treatments, treatments + n), std::move(x),
                                          std::move(feature_names));
        *out = new rulehaz_dataset{std::move(data)};
    });
}

int rulehaz_dataset_load_csv(const char* path, rulehaz_dataset** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        auto data = rulehaz::survival_from_table(rulehaz::read_csv_file(path));
        *out = new rulehaz_dataset{std::move(data)};
    });
}

int rulehaz_dataset_save_csv(const rulehaz_dataset* data, const char* path) {
    return guard([&] {
        require(data, "data");
        require(path, "path");
        write_file(path, rulehaz::dataset_csv(data->data));
    });
}

int rulehaz_dataset_shape(const rulehaz_dataset* data, size_t* rows, size_t* features) {
    return guard([&] {
        require(data, "data");
        if (rows) *rows = data->data.rows();
        if (features) *features = data->data.features();
    });
}

void rulehaz_dataset_free(rulehaz_dataset* data) { delete data; }

int rulehaz_fit(const rulehaz_dataset* data, const char* config_json, rulehaz_model** out) {
    return guard([&] {
        require(data, "data");
        require(out, "out");
        *out = nullptr;
        const auto config = rulehaz::fit_config_from_json(parse_json(config_json));
        auto outcome = rulehaz::fit_model(data->data, config);
        *out = new rulehaz_model{std::move(outcome.model)};
    });
}

int rulehaz_model_save(const rulehaz_model* model, const char* path) {
    return guard([&] {
        require(model, "model");
        require(path, "path");
        rulehaz::save_model(model->model, path);
    });
}

int rulehaz_model_load(const char* path, rulehaz_model** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        *out = new rulehaz_model{rulehaz::load_model(path)};
    });
}

int rulehaz_model_to_json(const rulehaz_model* model, char** out) {
    return guard([&] {
        require(model, "model");
        require(out, "out");
        *out = copy_string(rulehaz::dump_model(model->model));
    });
}

int rulehaz_model_from_json(const char* json, rulehaz_model** out) {
    return guard([&] {
        require(json, "json");
        require(out, "out");
        *out = nullptr;
        *out = new rulehaz_model{rulehaz::parse_model(json)};
    });
}

int rulehaz_model_features(const rulehaz_model* model, size_t* features) {
    return guard([&] {
        require(model, "model");
        require(features, "features");
        *features = model->model.features();
    });
}

int rulehaz_model_default_t0(const rulehaz_model* model, double* t0) {
    return guard([&] {
        require(model, "model");
        require(t0, "t0");
        *t0 = resolve_t0(model->model, 0.0);
    });
}

void rulehaz_model_free(rulehaz_model* model) { delete model; }

int rulehaz_predict(const rulehaz_model* model, size_t n, size_t p, const double* covariates, double t0,
                    double* survival_treated, double* survival_control, double* hte, int* extrapolated) {
    return guard([&] {
        require(model, "model");
        if (p != model->model.features()) {
            throw rulehaz::DimensionError("model expects " + std::to_string(model->model.features()) +
                                          " covariates, got " + std::to_string(p));
        }
        if (n > 0 && p > 0) require(covariates, "covariates");
        for (size_t i = 0; i < n; ++i) {
            const auto pred = rulehaz::predict_hte(model->model, std::span<const double>(covariates + i * p, p), t0);
            if (survival_treated) survival_treated[i] = pred.survival_treated;
            if (survival_control) survival_control[i] = pred.survival_control;
            if (hte) hte[i] = pred.hte;
            if (extrapolated) extrapolated[i] = pred.extrapolated ? 1 : 0;
        }
    });
}

int rulehaz_predict_csv(const rulehaz_model* model, const char* covariate_csv, double t0, char** out) {
    return guard([&] {
        require(model, "model");
        require(covariate_csv, "covariate_csv");
        require(out, "out");
        const auto& m = model->model;
        const auto data = rulehaz::covariates_from_table(rulehaz::read_csv_file(covariate_csv), m.feature_names);
        const auto preds = rulehaz::predict_hte(m, data, resolve_t0(m, t0));
        *out = copy_string(rulehaz::predictions_csv(preds, data));
    });
}

int rulehaz_report(const rulehaz_model* model, const rulehaz_dataset* data, const char* format, char** out) {
    return guard([&] {
        require(model, "model");
        require(data, "data");
        require(out, "out");
        const std::string fmt = format ? format : "text";
        // Supports are computed on the given rows, matched to the model by name.
        const auto& m = model->model;
        rulehaz::CsvTable table;
        table.header = data->data.feature_names;
        for (size_t i = 0; i < data->data.rows(); ++i) {
            const auto r = data->data.row(i);
            table.rows.emplace_back(r.begin(), r.end());
        }
        const auto covs = rulehaz::covariates_from_table(table, m.feature_names);
        const auto report = rulehaz::build_report(m, covs);
        std::string text;
        if (fmt == "text") {
            text = rulehaz::report_text(report);
        } else if (fmt == "json") {
            text = rulehaz::report_json(report).dump(2) + "\n";
        } else if (fmt == "rules_csv") {
            text = rulehaz::report_rules_csv(report);
        } else if (fmt == "linear_csv") {
            text = rulehaz::report_linear_csv(report);
        } else if (fmt == "variables_csv") {
            text = rulehaz::report_variables_csv(report);
        } else {
            throw rulehaz::ConfigError("unknown report format '" + fmt +
                                       "' (text, json, rules_csv, linear_csv, variables_csv)");
        }
        *out = copy_string(text);
    });
}

int rulehaz_simulate(const char* scenario_json, rulehaz_dataset** out, char** metadata) {
    return guard([&] {
        require(out, "out");
        *out = nullptr;
        const auto spec = rulehaz::scenario_from_json(parse_json(scenario_json));
        if (spec.n == 0) throw rulehaz::ConfigError("n must be positive");
        auto sim = rulehaz::simulate(spec);
        if (metadata) {
            auto meta = rulehaz::scenario_to_json(spec);
            meta["censoring_fraction"] = sim.censoring_fraction;
            meta["events"] = sim.data.event_count();
            *metadata = copy_string(meta.dump(2) + "\n");
        }
        *out = new rulehaz_dataset{std::move(sim.data)};
    });
}

int rulehaz_benchmark(const char* config_json, char** csv, char** summary_json) {
    return guard([&] {
        const auto config = rulehaz::benchmark_config_from_json(parse_json(config_json));
        const auto result = rulehaz::run_benchmark(config);
        if (csv) *csv = copy_string(rulehaz::benchmark_csv(result));
        if (summary_json) *summary_json = copy_string(result.summary.dump(2) + "\n");
    });
}

int rulehaz_truth_csv(const char* scenario_json, const char* covariate_csv, char** out) {
    return guard([&] {
        require(covariate_csv, "covariate_csv");
        require(out, "out");
        const auto spec = rulehaz::scenario_from_json(parse_json(scenario_json));
        std::vector<std::string> names;
        for (size_t j = 1; j <= rulehaz::kScenarioCovariates; ++j) names.push_back("x" + std::to_string(j));
        const auto data = rulehaz::covariates_from_table(rulehaz::read_csv_file(covariate_csv), names);
        *out = copy_string(rulehaz::truth_csv(spec, data));
    });
}

} // extern "C"
