#include "rulehaz/model.hpp"

#include "rulehaz/error.hpp"

#include <algorithm>

namespace rulehaz {

double BaselineHazard::cumulative(double t) const {
    const auto end = std::upper_bound(event_times.begin(), event_times.end(), t);
    double h = 0.0;
    for (auto it = event_times.begin(); it != end; ++it) {
        h += increments[static_cast<std::size_t>(it - event_times.begin())];
    }
    return h;
}

CoefficientBlocks unpack_coefficients(const Eigen::VectorXd& coef, const BasisSet& basis) {
    if (static_cast<std::size_t>(coef.size()) != basis.column_count()) {
        throw DimensionError("coefficient vector does not match the basis");
    }
    CoefficientBlocks b;
    Eigen::Index c = 0;
    for (std::size_t k = 0; k < basis.main_rules.size(); ++k) b.theta.push_back(coef[c++]);
    for (std::size_t j = 0; j < basis.linear_terms.size(); ++j) b.theta_star.push_back(coef[c++]);
    for (std::size_t k = 0; k < basis.treat_rules.size(); ++k) {
        b.alpha.push_back(coef[c++]);
        b.beta.push_back(coef[c++]);
    }
    for (std::size_t j = 0; j < basis.linear_terms.size(); ++j) {
        b.alpha_star.push_back(coef[c++]);
        b.beta_star.push_back(coef[c++]);
    }
    return b;
}

Eigen::VectorXd pack_coefficients(const CoefficientBlocks& b) {
    const std::size_t n = b.theta.size() + b.theta_star.size() + 2 * b.alpha.size() + 2 * b.alpha_star.size();
    Eigen::VectorXd coef(static_cast<Eigen::Index>(n));
    Eigen::Index c = 0;
    for (double v : b.theta) coef[c++] = v;
    for (double v : b.theta_star) coef[c++] = v;
    for (std::size_t k = 0; k < b.alpha.size(); ++k) {
        coef[c++] = b.alpha[k];
        coef[c++] = b.beta[k];
    }
    for (std::size_t j = 0; j < b.alpha_star.size(); ++j) {
        coef[c++] = b.alpha_star[j];
        coef[c++] = b.beta_star[j];
    }
    return coef;
}

HteModel::Predictors HteModel::predictors(std::span<const double> x) const {
    if (x.size() < features()) throw DimensionError("covariate vector shorter than the model's feature list");
    Predictors p;
    for (std::size_t k = 0; k < basis.main_rules.size(); ++k) {
        if (coef.theta[k] != 0.0) p.main += coef.theta[k] * basis.main_rules[k].evaluate(x);
    }
    for (std::size_t j = 0; j < basis.linear_terms.size(); ++j) {
        const double l = basis.linear_terms[j].evaluate(x);
        p.main += coef.theta_star[j] * l;
        p.treated += coef.alpha_star[j] * l;
        p.control += coef.beta_star[j] * l;
    }
    for (std::size_t k = 0; k < basis.treat_rules.size(); ++k) {
        if (coef.alpha[k] == 0.0 && coef.beta[k] == 0.0) continue;
        const double r = basis.treat_rules[k].evaluate(x);
        p.treated += coef.alpha[k] * r;
        p.control += coef.beta[k] * r;
    }
    return p;
}

bool HteModel::paired_selection_holds() const {
    auto ok = [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t k = 0; k < a.size(); ++k) {
            if ((a[k] == 0.0) != (b[k] == 0.0)) return false;
        }
        return true;
    };
    return ok(coef.alpha, coef.beta) && ok(coef.alpha_star, coef.beta_star);
}

void HteModel::check_paired_selection() const {
    if (!paired_selection_holds()) {
        throw DataError("paired-selection constraint violated: a treatment pair is only half zero");
    }
}

} // namespace rulehaz
