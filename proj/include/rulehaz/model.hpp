#pragma once

#include "rulehaz/basis.hpp"
#include "rulehaz/dataset.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rulehaz {

/// Right-continuous step function H0(t) = sum of increments at event times <= t.
struct BaselineHazard {
    std::vector<double> event_times;
    std::vector<double> increments;

    double cumulative(double t) const;
    double last_time() const { return event_times.empty() ? 0.0 : event_times.back(); }
};

struct CoefficientBlocks {
    std::vector<double> theta;       // main-effect rules
    std::vector<double> theta_star;  // main-effect linear terms
    std::vector<double> alpha;       // treatment rules, treated arm
    std::vector<double> beta;        // treatment rules, control arm
    std::vector<double> alpha_star;  // linear terms, treated arm
    std::vector<double> beta_star;   // linear terms, control arm
};

/// Splits a design-ordered coefficient vector into blocks.
CoefficientBlocks unpack_coefficients(const Eigen::VectorXd& coef, const BasisSet& basis);
Eigen::VectorXd pack_coefficients(const CoefficientBlocks& blocks);

struct HteModel {
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> feature_kinds;
    BasisSet basis;
    CoefficientBlocks coef;
    BaselineHazard baseline;
    double max_time = 0.0;  // largest observed training time
    double lambda_selected = 0.0;
    nlohmann::json fit_report = nlohmann::json::object();

    std::size_t features() const { return feature_names.size(); }

    /// Main part, treated-arm part and control-arm part of the linear predictor.
    struct Predictors {
        double main = 0.0;
        double treated = 0.0;
        double control = 0.0;
    };
    Predictors predictors(std::span<const double> x) const;

    /// Throws DataError when a treatment or linear pair is half-zero.
    void check_paired_selection() const;
    bool paired_selection_holds() const;
};

} // namespace rulehaz
