#include "rulehaz/hte.hpp"

#include "rulehaz/cox.hpp"
#include "rulehaz/error.hpp"
#include "rulehaz/linear_term.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rulehaz {

BaselineHazard breslow_baseline(std::span<const double> times, std::span<const int> events,
                                const Eigen::Ref<const Eigen::VectorXd>& eta) {
    const CoxRiskSets risk(times, events);
    BaselineHazard h;
    const double hi = eta.size() ? eta.maxCoeff() : 0.0;
    const double lo = eta.size() ? eta.minCoeff() : 0.0;
    if (hi - lo >= 600.0) {
        const auto sums = risk.event_sums(eta);
        h.event_times = sums.times;
        for (std::size_t g = 0; g < sums.times.size(); ++g) {
            h.increments.push_back(sums.deaths[g] * std::exp(-sums.log_risk_sum[g]));
        }
        return h;
    }
    // Plain risk-set sums (shifted by the largest eta), latest time first.
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });
    double acc = 0.0;
    for (std::size_t pos = 0; pos < order.size();) {
        const double t = times[order[pos]];
        double deaths = 0.0;
        for (; pos < order.size() && times[order[pos]] == t; ++pos) {
            acc += std::exp(eta[static_cast<Eigen::Index>(order[pos])] - hi);
            deaths += events[order[pos]];
        }
        if (deaths > 0.0) {
            h.event_times.push_back(t);
            h.increments.push_back(deaths / acc * std::exp(-hi));
        }
    }
    std::reverse(h.event_times.begin(), h.event_times.end());
    std::reverse(h.increments.begin(), h.increments.end());
    return h;
}

HtePrediction predict_hte(const HteModel& model, std::span<const double> x, double t0) {
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw ConfigError("prediction horizon must be positive");
    const auto eta = model.predictors(x);
    const double h0 = model.baseline.cumulative(t0);
    HtePrediction p;
    p.horizon = t0;
    p.survival_treated = std::exp(-h0 * std::exp(eta.main + eta.treated));
    p.survival_control = std::exp(-h0 * std::exp(eta.main + eta.control));
    p.hte = p.survival_treated - p.survival_control;
    p.extrapolated = t0 > model.max_time;
    return p;
}

std::vector<HtePrediction> predict_hte(const HteModel& model, const SurvivalDataset& data, double t0) {
    if (data.features() < model.features()) throw DimensionError("dataset has fewer covariates than the model");
    std::vector<HtePrediction> out;
    out.reserve(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) out.push_back(predict_hte(model, data.row(i), t0));
    return out;
}

double rule_hazard_ratio(const HteModel& model, std::size_t k) {
    if (k >= model.coef.alpha.size()) throw DimensionError("treatment rule index out of range");
    return std::exp(model.coef.alpha[k] - model.coef.beta[k]);
}

double linear_hazard_ratio(const HteModel& model, std::size_t j, std::span<const double> x) {
    if (j >= model.basis.linear_terms.size()) throw DimensionError("linear term index out of range");
    const double l = model.basis.linear_terms[j].evaluate(x);
    return std::exp((model.coef.alpha_star[j] - model.coef.beta_star[j]) * l);
}

double default_horizon(std::span<const double> times) {
    if (times.empty()) throw DataError("cannot pick a horizon without observed times");
    std::vector<double> sorted(times.begin(), times.end());
    std::sort(sorted.begin(), sorted.end());
    return empirical_quantile(sorted, 0.9);
}

} // namespace rulehaz
