#pragma once

#include "rulehaz/basis.hpp"
#include "rulehaz/cox.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rulehaz {

/// (2/N) [ -sum_i d_i eta_i + sum_i d_i log sum_{m in R(t_i)} exp(eta_m) ], eta = X b.
double neg_log_partial_likelihood(const Eigen::MatrixXd& x, std::span<const double> times,
                                  std::span<const int> events, const Eigen::VectorXd& coef);

/// Penalized Cox problem: scaled negative log partial likelihood plus
/// lambda * sum_g w_g ||b_g||_2.
class CoxGroupLasso {
public:
    CoxGroupLasso(const Eigen::MatrixXd& x, std::vector<CoefficientGroup> groups,
                  std::span<const double> times, std::span<const int> events);

    std::size_t rows() const { return static_cast<std::size_t>(x_->rows()); }
    std::size_t columns() const { return static_cast<std::size_t>(x_->cols()); }
    const std::vector<CoefficientGroup>& groups() const { return groups_; }
    const CoxRiskSets& risk_sets() const { return risk_; }

    Eigen::VectorXd linear_predictor(const Eigen::VectorXd& coef) const;
    double loss(const Eigen::VectorXd& coef) const;
    double loss_and_gradient(const Eigen::VectorXd& coef, Eigen::VectorXd& grad) const;
    // Same from a precomputed linear predictor.
    double loss_at(const Eigen::VectorXd& eta) const;
    double loss_and_gradient_at(const Eigen::VectorXd& eta, Eigen::VectorXd& grad) const;
    double penalty(const Eigen::VectorXd& coef) const;  // without lambda
    double objective(const Eigen::VectorXd& coef, double lambda) const;

    /// Smallest lambda at which the zero vector is optimal.
    double lambda_max() const;

    /// Block soft-thresholding of every group with threshold step * lambda * w_g.
    void prox(Eigen::VectorXd& v, double threshold) const;
    /// Same under a per-column metric that is constant within each group:
    /// group g is thresholded at threshold * w_g / metric_g.
    void prox(Eigen::VectorXd& v, double threshold, const Eigen::VectorXd& metric) const;

    /// Diagonal of the loss Hessian at zero, replaced within each group by the
    /// group maximum (floored away from zero). Used to precondition steps.
    const Eigen::VectorXd& metric() const { return metric_; }

    /// Max over groups of the KKT violation: max(0, ||g_g|| - lambda w_g) for a
    /// zero group, ||g_g + lambda w_g b_g / ||b_g|| || for an active one.
    double kkt_residual(const Eigen::VectorXd& coef, double lambda) const;
    double kkt_residual(const Eigen::VectorXd& coef, const Eigen::VectorXd& grad, double lambda) const;

    std::size_t active_groups(const Eigen::VectorXd& coef) const;

private:
    const Eigen::MatrixXd* x_;
    std::vector<CoefficientGroup> groups_;
    CoxRiskSets risk_;
    double scale_;
    Eigen::VectorXd metric_;
};

struct PathConfig {
    std::size_t num_lambdas = 100;
    double min_ratio = 1e-3;
    std::vector<double> lambdas;      // explicit nonincreasing grid; overrides the geometric one
    double tolerance = 1e-8;          // relative objective change between accepted steps
    double kkt_tolerance = 1e-6;      // also required before declaring convergence; <= 0 disables
    std::size_t max_iterations = 10000;
    std::vector<double> group_weights;  // optional per-group override (adaptive variants)

    void validate() const;
};

struct SolveResult {
    Eigen::VectorXd coef;
    double objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double step_lipschitz = 0.0;
};

/// Accelerated proximal gradient with backtracking, preconditioned by the
/// group-constant diagonal metric, with adaptive momentum restarts.
SolveResult solve_at(const CoxGroupLasso& problem, double lambda, const Eigen::VectorXd& start,
                     const PathConfig& config, double lipschitz_guess = 0.0);

struct FitPath {
    std::vector<double> lambdas;
    Eigen::MatrixXd coefficients;  // columns x lambdas
    std::vector<double> objective;
    std::vector<std::size_t> iterations;
    std::vector<bool> converged;
    std::vector<std::size_t> active_groups;
    std::vector<double> kkt;
    // Filled by cross-validation.
    std::vector<double> cv_mean;
    std::vector<double> cv_se;
    std::size_t folds = 0;
    std::size_t selected = 0;
    std::size_t selected_1se = 0;

    bool all_converged() const;
};

/// Geometric grid of num_lambdas values from lambda_max down to min_ratio * lambda_max.
std::vector<double> lambda_grid(double lambda_max, std::size_t count, double min_ratio);

/// Warm-started path over the configured grid. Non-convergence is recorded per
/// lambda and the path continues.
FitPath solve_path(const Eigen::MatrixXd& x, const std::vector<CoefficientGroup>& groups,
                   std::span<const double> times, std::span<const int> events,
                   const PathConfig& config);

struct CvConfig {
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    bool one_standard_error = false;
    // Fold paths only feed the deviance curve; by default they stop on the
    // relative-objective rule alone (<= 0 disables the KKT check).
    double fold_kkt_tolerance = 0.0;
};

/// Fold labels stratified by the event indicator. Retries with a fresh seed
/// (up to five attempts) until every training complement has an event and,
/// when there are at least as many events as folds, every fold has one.
std::vector<std::size_t> stratified_folds(std::span<const int> events, std::size_t folds,
                                          std::uint64_t seed);

/// Fits the full-data path, then per fold refits on the training rows over the
/// same grid and scores held-out deviance as -2 [l_full(b_-f) - l_-f(b_-f)].
/// The selected index minimizes the mean CV deviance (or follows the 1-SE rule).
FitPath cross_validate(const Eigen::MatrixXd& x, const std::vector<CoefficientGroup>& groups,
                       std::span<const double> times, std::span<const int> events,
                       const PathConfig& path, const CvConfig& cv);

} // namespace rulehaz
