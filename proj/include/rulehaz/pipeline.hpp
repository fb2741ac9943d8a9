#pragma once

#include "rulehaz/basis.hpp"
#include "rulehaz/boosting.hpp"
#include "rulehaz/dataset.hpp"
#include "rulehaz/group_lasso.hpp"
#include "rulehaz/linear_term.hpp"
#include "rulehaz/model.hpp"

#include <nlohmann/json.hpp>

#include <optional>

namespace rulehaz {

struct FitConfig {
    BoostConfig boost;
    PathConfig path;
    CvConfig cv;
    double winsor_q = kDefaultWinsorQuantile;
    // When set, cross-validation is skipped and the model is fitted at this
    // lambda (values >= lambda_max give the null treatment model).
    std::optional<double> lambda;
    bool lambda_at_max = false;

    void validate() const;
};

/// Keys: trees, mean_depth (average tree size L, terminal nodes), shrinkage,
/// subsample, min_leaf, seed (boosting and CV folds), lambda (number or "max"),
/// cv_folds, one_standard_error, winsor_q, num_lambdas, lambda_min_ratio,
/// tolerance, kkt_tolerance, max_iterations. Unknown keys are a ConfigError.
FitConfig fit_config_from_json(const nlohmann::json& j);
nlohmann::json fit_config_to_json(const FitConfig& config);

struct FitOutcome {
    HteModel model;
    FitPath path;
    BasisReport basis_report;
    std::size_t candidate_rules = 0;
};

/// Rule generation, rule division, basis construction, penalized Cox fit with
/// lambda chosen by cross-validation (unless forced), Breslow baseline.
/// Throws DataError when an arm has no events.
FitOutcome fit_model(const SurvivalDataset& data, const FitConfig& config);

} // namespace rulehaz
