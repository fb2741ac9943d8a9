#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace rulehaz {

/// Risk-set bookkeeping for the Breslow partial likelihood.
///
/// Subject m is at risk at event time s when t_m >= s. Tied event times share
/// one denominator. Risk-set sums are taken relative to the largest linear
/// predictor, falling back to log space when the range is extreme.
class CoxRiskSets {
public:
    CoxRiskSets(std::span<const double> times, std::span<const int> events);

    std::size_t rows() const { return events_.size(); }
    std::size_t event_count() const { return event_count_; }

    /// sum_i d_i [eta_i - log sum_{m in R(t_i)} exp(eta_m)].
    double log_partial_likelihood(const Eigen::Ref<const Eigen::VectorXd>& eta) const;

    /// Fills the gradient of the log partial likelihood with respect to eta and
    /// returns the log partial likelihood.
    double score(const Eigen::Ref<const Eigen::VectorXd>& eta, Eigen::VectorXd& grad) const;

    /// Distinct event times (ascending), events per time and the log of the
    /// risk-set sum of exp(eta) at each.
    struct EventSums {
        std::vector<double> times;
        std::vector<double> deaths;
        std::vector<double> log_risk_sum;
    };
    EventSums event_sums(const Eigen::Ref<const Eigen::VectorXd>& eta) const;

private:
    void check(const Eigen::Ref<const Eigen::VectorXd>& eta) const;
    // Log of the risk-set sum for every tie group.
    std::vector<double> log_risk_sums(const Eigen::Ref<const Eigen::VectorXd>& eta) const;

    std::vector<double> times_;
    std::vector<int> events_;
    std::vector<std::size_t> order_;        // ascending time
    std::vector<std::size_t> group_start_;  // tie-group boundaries into order_, size G+1
    std::vector<double> group_deaths_;
    std::size_t event_count_ = 0;
};

/// Gradient of the Breslow log partial likelihood with respect to the scores:
/// r_i = d_i - sum_k d_k I(t_i >= t_k) exp(F_i) / sum_m I(t_m >= t_k) exp(F_m).
/// Throws NumericalError on non-finite scores.
Eigen::VectorXd cox_gradient(std::span<const double> times, std::span<const int> events,
                             const Eigen::Ref<const Eigen::VectorXd>& scores);

double cox_log_partial_likelihood(std::span<const double> times, std::span<const int> events,
                                  const Eigen::Ref<const Eigen::VectorXd>& scores);

} // namespace rulehaz
