#pragma once

#include "rulehaz/model.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace rulehaz {

/// Breslow estimator: increment at event time s is d(s) / sum_{t_m >= s} exp(eta_m).
BaselineHazard breslow_baseline(std::span<const double> times, std::span<const int> events,
                                const Eigen::Ref<const Eigen::VectorXd>& eta);

struct HtePrediction {
    double horizon = 0.0;
    double survival_treated = 1.0;  // S1(t0)
    double survival_control = 1.0;  // S0(t0)
    double hte = 0.0;               // S1 - S0
    bool extrapolated = false;      // t0 beyond the last observed training time
};

/// S_z(t0) = exp(-H0(t0) exp(eta_z)) for both arms. Throws ConfigError unless t0 > 0.
HtePrediction predict_hte(const HteModel& model, std::span<const double> x, double t0);

std::vector<HtePrediction> predict_hte(const HteModel& model, const SurvivalDataset& data, double t0);

/// exp(alpha_k - beta_k): treated-vs-control hazard ratio where treatment rule k fires.
double rule_hazard_ratio(const HteModel& model, std::size_t k);

/// exp((alpha*_j - beta*_j) l_j(x)) for linear term j at covariates x.
double linear_hazard_ratio(const HteModel& model, std::size_t j, std::span<const double> x);

/// Default reporting horizon: 90th percentile of observed times (linear interpolation).
double default_horizon(std::span<const double> times);

} // namespace rulehaz
