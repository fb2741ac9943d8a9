#include "rulehaz/cox.hpp"

#include "rulehaz/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rulehaz {

namespace {

double log_add_exp(double a, double b) {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

} // namespace

CoxRiskSets::CoxRiskSets(std::span<const double> times, std::span<const int> events)
    : times_(times.begin(), times.end()), events_(events.begin(), events.end()) {
    if (times_.size() != events_.size()) throw DimensionError("times and events differ in length");
    order_.resize(times_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return times_[a] < times_[b]; });
    for (std::size_t pos = 0; pos < order_.size(); ++pos) {
        if (pos == 0 || times_[order_[pos]] != times_[order_[pos - 1]]) {
            group_start_.push_back(pos);
            group_deaths_.push_back(0.0);
        }
        const int e = events_[order_[pos]];
        group_deaths_.back() += e;
        event_count_ += e == 1;
    }
    group_start_.push_back(order_.size());
}

void CoxRiskSets::check(const Eigen::Ref<const Eigen::VectorXd>& eta) const {
    if (static_cast<std::size_t>(eta.size()) != rows()) {
        throw DimensionError("linear predictor length does not match the number of subjects");
    }
    if (!eta.allFinite()) throw NumericalError("non-finite linear predictor in partial likelihood");
}

std::vector<double> CoxRiskSets::log_risk_sums(const Eigen::Ref<const Eigen::VectorXd>& eta) const {
    const std::size_t groups = group_deaths_.size();
    std::vector<double> out(groups);
    if (groups == 0) return out;
    const double hi = eta.maxCoeff();
    const double lo = eta.minCoeff();
    if (hi - lo < 600.0) {
        // Shifted sums cannot underflow to zero in this range.
        double acc = 0.0;
        for (std::size_t g = groups; g-- > 0;) {
            for (std::size_t pos = group_start_[g]; pos < group_start_[g + 1]; ++pos) {
                acc += std::exp(eta[static_cast<Eigen::Index>(order_[pos])] - hi);
            }
            out[g] = std::log(acc) + hi;
        }
        return out;
    }
    double acc = -INFINITY;
    for (std::size_t g = groups; g-- > 0;) {
        for (std::size_t pos = group_start_[g]; pos < group_start_[g + 1]; ++pos) {
            acc = log_add_exp(acc, eta[static_cast<Eigen::Index>(order_[pos])]);
        }
        out[g] = acc;
    }
    return out;
}

double CoxRiskSets::log_partial_likelihood(const Eigen::Ref<const Eigen::VectorXd>& eta) const {
    check(eta);
    const auto lrs = log_risk_sums(eta);
    double ll = 0.0;
    for (std::size_t i = 0; i < rows(); ++i) {
        if (events_[i]) ll += eta[static_cast<Eigen::Index>(i)];
    }
    for (std::size_t g = 0; g < lrs.size(); ++g) {
        if (group_deaths_[g] > 0) ll -= group_deaths_[g] * lrs[g];
    }
    return ll;
}

double CoxRiskSets::score(const Eigen::Ref<const Eigen::VectorXd>& eta, Eigen::VectorXd& grad) const {
    check(eta);
    const auto lrs = log_risk_sums(eta);
    grad.resize(static_cast<Eigen::Index>(rows()));
    double ll = 0.0;
    if (lrs.empty() || eta.maxCoeff() - eta.minCoeff() >= 600.0) {
        // log of the running sum over event groups up to g of d_g / S_g
        double log_cum = -INFINITY;
        for (std::size_t g = 0; g < lrs.size(); ++g) {
            if (group_deaths_[g] > 0) {
                log_cum = log_add_exp(log_cum, std::log(group_deaths_[g]) - lrs[g]);
                ll -= group_deaths_[g] * lrs[g];
            }
            for (std::size_t pos = group_start_[g]; pos < group_start_[g + 1]; ++pos) {
                const auto i = static_cast<Eigen::Index>(order_[pos]);
                const double e = events_[order_[pos]];
                grad[i] = e - (log_cum == -INFINITY ? 0.0 : std::exp(eta[i] + log_cum));
                ll += e * eta[i];
            }
        }
        return ll;
    }
    // Same sum relative to exp(ref), ref the log of the full risk set.
    const double ref = lrs.front();
    double cum = 0.0;
    for (std::size_t g = 0; g < lrs.size(); ++g) {
        if (group_deaths_[g] > 0) {
            cum += group_deaths_[g] * std::exp(ref - lrs[g]);
            ll -= group_deaths_[g] * lrs[g];
        }
        for (std::size_t pos = group_start_[g]; pos < group_start_[g + 1]; ++pos) {
            const auto i = static_cast<Eigen::Index>(order_[pos]);
            const double e = events_[order_[pos]];
            grad[i] = e - cum * std::exp(eta[i] - ref);
            ll += e * eta[i];
        }
    }
    return ll;
}

CoxRiskSets::EventSums CoxRiskSets::event_sums(const Eigen::Ref<const Eigen::VectorXd>& eta) const {
    check(eta);
    const auto lrs = log_risk_sums(eta);
    EventSums out;
    for (std::size_t g = 0; g < lrs.size(); ++g) {
        if (group_deaths_[g] <= 0) continue;
        out.times.push_back(times_[order_[group_start_[g]]]);
        out.deaths.push_back(group_deaths_[g]);
        out.log_risk_sum.push_back(lrs[g]);
    }
    return out;
}

Eigen::VectorXd cox_gradient(std::span<const double> times, std::span<const int> events,
                             const Eigen::Ref<const Eigen::VectorXd>& scores) {
    if (std::any_of(times.begin(), times.end(), [](double t) { return !(t > 0.0) || !std::isfinite(t); })) {
        throw DataError("survival times must be positive and finite");
    }
    CoxRiskSets rs(times, events);
    Eigen::VectorXd grad;
    rs.score(scores, grad);
    return grad;
}

double cox_log_partial_likelihood(std::span<const double> times, std::span<const int> events,
                                  const Eigen::Ref<const Eigen::VectorXd>& scores) {
    return CoxRiskSets(times, events).log_partial_likelihood(scores);
}

} // namespace rulehaz
