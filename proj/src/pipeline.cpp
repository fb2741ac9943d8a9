#include "rulehaz/pipeline.hpp"

#include "rulehaz/error.hpp"
#include "rulehaz/hte.hpp"
#include "rulehaz/partition.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace rulehaz {

void FitConfig::validate() const {
    boost.validate();
    path.validate();
    if (!(winsor_q >= 0.0 && winsor_q < 0.5)) throw ConfigError("winsor quantile must lie in [0, 0.5)");
    if (lambda && !(*lambda >= 0.0)) throw ConfigError("forced lambda must be nonnegative");
    if (!lambda && !lambda_at_max && cv.folds < 2) throw ConfigError("cross-validation needs at least two folds");
}

namespace {

nlohmann::json path_summary(const FitPath& path) {
    nlohmann::json j;
    j["lambdas"] = path.lambdas;
    j["active_groups"] = path.active_groups;
    j["iterations"] = path.iterations;
    j["converged"] = path.converged;
    j["kkt_residual"] = path.kkt;
    j["objective"] = path.objective;
    if (!path.cv_mean.empty()) {
        j["cv_deviance"] = path.cv_mean;
        j["cv_se"] = path.cv_se;
        j["folds"] = path.folds;
        j["selected_index_1se"] = path.selected_1se;
    }
    j["selected_index"] = path.selected;
    return j;
}

} // namespace

FitConfig fit_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("fit configuration must be a JSON object");
    static const std::set<std::string> known = {"trees", "mean_depth", "shrinkage", "subsample", "min_leaf",
                                                "seed", "lambda", "cv_folds", "one_standard_error", "winsor_q",
                                                "num_lambdas", "lambda_min_ratio", "tolerance", "kkt_tolerance",
                                                "max_iterations"};
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) throw ConfigError("unknown fit option '" + item.key() + "'");
    }
    FitConfig c;
    try {
        c.boost.num_trees = j.value("trees", c.boost.num_trees);
        c.boost.mean_leaves = j.value("mean_depth", c.boost.mean_leaves);
        c.boost.shrinkage = j.value("shrinkage", c.boost.shrinkage);
        c.boost.subsample = j.value("subsample", c.boost.subsample);
        c.boost.min_leaf_size = j.value("min_leaf", c.boost.min_leaf_size);
        c.boost.seed = j.value("seed", c.boost.seed);
        c.cv.seed = c.boost.seed;
        c.cv.folds = j.value("cv_folds", c.cv.folds);
        c.cv.one_standard_error = j.value("one_standard_error", c.cv.one_standard_error);
        c.winsor_q = j.value("winsor_q", c.winsor_q);
        c.path.num_lambdas = j.value("num_lambdas", c.path.num_lambdas);
        c.path.min_ratio = j.value("lambda_min_ratio", c.path.min_ratio);
        c.path.tolerance = j.value("tolerance", c.path.tolerance);
        c.path.kkt_tolerance = j.value("kkt_tolerance", c.path.kkt_tolerance);
        c.path.max_iterations = j.value("max_iterations", c.path.max_iterations);
        if (j.contains("lambda") && !j.at("lambda").is_null()) {
            const auto& l = j.at("lambda");
            if (l.is_string()) {
                if (l.get<std::string>() != "max") throw ConfigError("lambda must be a number or \"max\"");
                c.lambda_at_max = true;
            } else {
                c.lambda = l.get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad fit option: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json fit_config_to_json(const FitConfig& c) {
    nlohmann::json j = {{"trees", c.boost.num_trees},
                        {"mean_depth", c.boost.mean_leaves},
                        {"shrinkage", c.boost.shrinkage},
                        {"subsample", c.boost.subsample},
                        {"min_leaf", c.boost.min_leaf_size},
                        {"seed", c.boost.seed},
                        {"cv_folds", c.cv.folds},
                        {"one_standard_error", c.cv.one_standard_error},
                        {"winsor_q", c.winsor_q},
                        {"num_lambdas", c.path.num_lambdas},
                        {"lambda_min_ratio", c.path.min_ratio},
                        {"tolerance", c.path.tolerance},
                        {"kkt_tolerance", c.path.kkt_tolerance},
                        {"max_iterations", c.path.max_iterations}};
    if (c.lambda_at_max) {
        j["lambda"] = "max";
    } else if (c.lambda) {
        j["lambda"] = *c.lambda;
    }
    return j;
}

FitOutcome fit_model(const SurvivalDataset& data, const FitConfig& config) {
    config.validate();
    data.validate();
    std::size_t events_treated = 0, events_control = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (!data.events[i]) continue;
        (data.treatments[i] ? events_treated : events_control) += 1;
    }
    if (events_treated == 0 || events_control == 0) {
        throw DataError("each treatment arm needs at least one event (treated: " + std::to_string(events_treated) +
                        ", control: " + std::to_string(events_control) + ")");
    }

    FitOutcome out;
    const BoostResult boosted = boost(data, config.boost);
    out.candidate_rules = boosted.candidates.rules.size();
    const PartitionedRules parts = partition(boosted.candidates);
    const BasisSet basis = make_basis(parts.main_rules, parts.treat_rules, data, config.winsor_q, &out.basis_report);
    const Design design = build_design(data, basis);

    if (config.lambda || config.lambda_at_max) {
        const CoxGroupLasso problem(design.x, design.groups, data.times, data.events);
        const double lmax = problem.lambda_max();
        const double target = config.lambda_at_max ? lmax : *config.lambda;
        PathConfig pc = config.path;
        pc.lambdas.clear();
        for (double l : lambda_grid(lmax, config.path.num_lambdas, config.path.min_ratio)) {
            if (l > target) pc.lambdas.push_back(l);
        }
        pc.lambdas.push_back(target);
        out.path = solve_path(design.x, design.groups, data.times, data.events, pc);
        out.path.selected = out.path.lambdas.size() - 1;
    } else {
        out.path = cross_validate(design.x, design.groups, data.times, data.events, config.path, config.cv);
    }

    const std::size_t sel = out.path.selected;
    const Eigen::VectorXd coef = out.path.coefficients.col(static_cast<Eigen::Index>(sel));
    const Eigen::VectorXd eta = design.x * coef;

    HteModel& model = out.model;
    model.feature_names = data.feature_names;
    model.feature_kinds = data.feature_kinds;
    model.basis = basis;
    model.coef = unpack_coefficients(coef, basis);
    model.baseline = breslow_baseline(data.times, data.events, eta);
    model.max_time = *std::max_element(data.times.begin(), data.times.end());
    model.lambda_selected = out.path.lambdas[sel];

    nlohmann::json report;
    report["rows"] = data.rows();
    report["events"] = data.event_count();
    report["candidate_rules"] = out.candidate_rules;
    report["main_rules"] = {{"candidates", out.basis_report.main_candidates},
                            {"unique", out.basis_report.main_unique},
                            {"complements_dropped", out.basis_report.main_complements},
                            {"retained", out.basis_report.main_retained}};
    report["treatment_rules"] = {{"candidates", out.basis_report.treat_candidates},
                                 {"unique", out.basis_report.treat_unique},
                                 {"retained", out.basis_report.treat_retained}};
    report["linear_terms"] = {{"retained", out.basis_report.linear_retained},
                              {"excluded", out.basis_report.linear_excluded}};
    report["default_t0"] = default_horizon(data.times);
    report["lambda_max"] = out.path.lambdas.empty() ? 0.0 : out.path.lambdas.front();
    report["selected_index"] = sel;
    report["converged"] = out.path.all_converged();
    report["kkt_residual"] = out.path.kkt[sel];
    report["path"] = path_summary(out.path);
    report["config"] = fit_config_to_json(config);
    report["subsample_rows"] = subsample_size(config.boost, data.rows());
    model.fit_report = std::move(report);
    model.check_paired_selection();
    return out;
}

} // namespace rulehaz
