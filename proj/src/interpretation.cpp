#include "rulehaz/interpretation.hpp"

#include "rulehaz/error.hpp"
#include "rulehaz/hte.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace rulehaz {

namespace {

bool pair_active(double a, double b) { return a != 0.0 || b != 0.0; }

void check_data(const HteModel& model, const SurvivalDataset& data) {
    if (data.features() < model.features()) throw DimensionError("dataset has fewer covariates than the model");
}

} // namespace

double rule_importance(const HteModel& model, const SurvivalDataset& data, std::size_t k) {
    if (k >= model.basis.treat_rules.size()) throw DimensionError("treatment rule index out of range");
    check_data(model, data);
    const double diff = std::abs(model.coef.alpha[k] - model.coef.beta[k]);
    if (diff == 0.0) return 0.0;
    const double s = rule_support(model.basis.treat_rules[k], data);
    return diff * std::sqrt(s * (1.0 - s));
}

LinearImportance linear_importance(const HteModel& model, const SurvivalDataset& data, std::size_t j) {
    if (j >= model.basis.linear_terms.size()) throw DimensionError("linear term index out of range");
    check_data(model, data);
    const auto& term = model.basis.linear_terms[j];
    const double diff = std::abs(model.coef.alpha_star[j] - model.coef.beta_star[j]);
    LinearImportance out;
    out.per_subject.assign(data.rows(), 0.0);
    if (data.rows() == 0) return out;
    double mean = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) mean += term.evaluate(data.row(i));
    mean /= static_cast<double>(data.rows());
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        out.per_subject[i] = diff * std::abs(term.evaluate(data.row(i)) - mean);
        total += out.per_subject[i];
    }
    out.aggregate = total / static_cast<double>(data.rows());
    return out;
}

std::vector<double> variable_importance(const HteModel& model, const SurvivalDataset& data) {
    check_data(model, data);
    std::vector<double> imp(model.features(), 0.0);
    for (std::size_t j = 0; j < model.basis.linear_terms.size(); ++j) {
        imp[model.basis.linear_terms[j].feature] += linear_importance(model, data, j).aggregate;
    }
    for (std::size_t k = 0; k < model.basis.treat_rules.size(); ++k) {
        if (!pair_active(model.coef.alpha[k], model.coef.beta[k])) continue;
        const auto& rule = model.basis.treat_rules[k];
        std::set<std::size_t> features;
        for (const auto& c : rule.conditions()) features.insert(c.feature);
        if (features.empty()) continue;
        const double share = rule_importance(model, data, k) / static_cast<double>(features.size());
        for (auto f : features) imp[f] += share;
    }
    return imp;
}

RuleReport build_report(const HteModel& model, const SurvivalDataset& data) {
    check_data(model, data);
    RuleReport rep;
    const auto& names = model.feature_names;

    for (std::size_t k = 0; k < model.basis.treat_rules.size(); ++k) {
        if (!pair_active(model.coef.alpha[k], model.coef.beta[k])) continue;
        RuleReportRow row;
        row.rule = k;
        row.condition = format_rule(model.basis.treat_rules[k], names);
        row.raw_importance = rule_importance(model, data, k);
        row.hazard_ratio = rule_hazard_ratio(model, k);
        row.support = data.rows() ? rule_support(model.basis.treat_rules[k], data) : 0.0;
        rep.rules.push_back(row);
    }
    for (std::size_t j = 0; j < model.basis.linear_terms.size(); ++j) {
        if (!pair_active(model.coef.alpha_star[j], model.coef.beta_star[j])) continue;
        LinearReportRow row;
        row.term = j;
        row.feature = names[model.basis.linear_terms[j].feature];
        row.raw_importance = linear_importance(model, data, j).aggregate;
        row.hazard_ratio = std::exp(model.coef.alpha_star[j] - model.coef.beta_star[j]);
        rep.linear_terms.push_back(row);
    }
    double top = 0.0;
    for (const auto& r : rep.rules) top = std::max(top, r.raw_importance);
    for (const auto& r : rep.linear_terms) top = std::max(top, r.raw_importance);
    for (auto& r : rep.rules) r.importance = top > 0.0 ? 100.0 * (r.raw_importance / top) : 0.0;
    for (auto& r : rep.linear_terms) r.importance = top > 0.0 ? 100.0 * (r.raw_importance / top) : 0.0;
    std::stable_sort(rep.rules.begin(), rep.rules.end(),
                     [](const auto& a, const auto& b) { return a.raw_importance > b.raw_importance; });
    std::stable_sort(rep.linear_terms.begin(), rep.linear_terms.end(),
                     [](const auto& a, const auto& b) { return a.raw_importance > b.raw_importance; });

    for (std::size_t k = 0; k < model.basis.main_rules.size(); ++k) {
        if (model.coef.theta[k] == 0.0) continue;
        const auto& rule = model.basis.main_rules[k];
        rep.main_effects.push_back(
            {format_rule(rule, names), model.coef.theta[k], data.rows() ? rule_support(rule, data) : 0.0});
    }
    for (std::size_t j = 0; j < model.basis.linear_terms.size(); ++j) {
        if (model.coef.theta_star[j] == 0.0) continue;
        rep.main_effects.push_back({"linear(" + names[model.basis.linear_terms[j].feature] + ")",
                                    model.coef.theta_star[j], 1.0});
    }

    const auto vi = variable_importance(model, data);
    const double vmax = vi.empty() ? 0.0 : *std::max_element(vi.begin(), vi.end());
    for (std::size_t j = 0; j < vi.size(); ++j) {
        rep.variables.push_back({names[j], vmax > 0.0 ? 100.0 * (vi[j] / vmax) : 0.0, vi[j]});
    }
    return rep;
}

std::string report_text(const RuleReport& report) {
    std::string out;
    std::size_t width = 9;
    for (const auto& r : report.rules) width = std::max(width, r.condition.size());

    out += "Treatment-effect rules\n";
    out += fmt::format("{:<8} {:<{}}  {:>10}  {:>12}  {:>7}\n", "Rules", "", width, "Importance",
                       "Hazard_Ratio", "Support");
    for (std::size_t i = 0; i < report.rules.size(); ++i) {
        const auto& r = report.rules[i];
        out += fmt::format("{:<8} {:<{}}  {:>10.2f}  {:>12.2f}  {:>7.2f}\n", fmt::format("Rule {}", i + 1),
                           r.condition, width, r.importance, r.hazard_ratio, r.support);
    }
    out += "\nLinear terms\n";
    out += fmt::format("{:<16}  {:>10}  {:>12}\n", "Variable", "Importance", "Hazard_Ratio");
    for (const auto& r : report.linear_terms) {
        out += fmt::format("{:<16}  {:>10.2f}  {:>12.2f}\n", r.feature, r.importance, r.hazard_ratio);
    }
    out += "\nMain effects\n";
    std::size_t main_width = 4;
    for (const auto& r : report.main_effects) main_width = std::max(main_width, r.condition.size());
    out += fmt::format("{:<{}}  {:>12}  {:>7}\n", "Term", main_width, "Coefficient", "Support");
    for (const auto& r : report.main_effects) {
        out += fmt::format("{:<{}}  {:>12.4f}  {:>7.2f}\n", r.condition, main_width, r.coefficient, r.support);
    }
    out += "\nVariable importance\n";
    out += fmt::format("{:<16}  {:>10}\n", "Variable", "Importance");
    for (const auto& v : report.variables) out += fmt::format("{:<16}  {:>10.2f}\n", v.feature, v.importance);
    return out;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

} // namespace

std::string report_rules_csv(const RuleReport& report) {
    std::string out = "rank,rule_index,condition,importance,raw_importance,hazard_ratio,support\n";
    for (std::size_t i = 0; i < report.rules.size(); ++i) {
        const auto& r = report.rules[i];
        out += fmt::format("{},{},{},{},{},{},{}\n", i + 1, r.rule, csv_field(r.condition), r.importance,
                           r.raw_importance, r.hazard_ratio, r.support);
    }
    return out;
}

std::string report_linear_csv(const RuleReport& report) {
    std::string out = "rank,term_index,feature,importance,raw_importance,hazard_ratio\n";
    for (std::size_t i = 0; i < report.linear_terms.size(); ++i) {
        const auto& r = report.linear_terms[i];
        out += fmt::format("{},{},{},{},{},{}\n", i + 1, r.term, csv_field(r.feature), r.importance,
                           r.raw_importance, r.hazard_ratio);
    }
    return out;
}

std::string report_variables_csv(const RuleReport& report) {
    std::string out = "feature,importance,raw_importance\n";
    for (const auto& v : report.variables) {
        out += fmt::format("{},{},{}\n", csv_field(v.feature), v.importance, v.raw_importance);
    }
    return out;
}

nlohmann::json report_json(const RuleReport& report) {
    nlohmann::json j;
    j["rules"] = nlohmann::json::array();
    for (const auto& r : report.rules) {
        j["rules"].push_back({{"rule_index", r.rule}, {"condition", r.condition}, {"importance", r.importance},
                              {"raw_importance", r.raw_importance}, {"hazard_ratio", r.hazard_ratio},
                              {"support", r.support}});
    }
    j["linear_terms"] = nlohmann::json::array();
    for (const auto& r : report.linear_terms) {
        j["linear_terms"].push_back({{"term_index", r.term}, {"feature", r.feature}, {"importance", r.importance},
                                     {"raw_importance", r.raw_importance}, {"hazard_ratio", r.hazard_ratio}});
    }
    j["main_effects"] = nlohmann::json::array();
    for (const auto& r : report.main_effects) {
        j["main_effects"].push_back({{"term", r.condition}, {"coefficient", r.coefficient}, {"support", r.support}});
    }
    j["variable_importance"] = nlohmann::json::array();
    for (const auto& v : report.variables) {
        j["variable_importance"].push_back(
            {{"feature", v.feature}, {"importance", v.importance}, {"raw_importance", v.raw_importance}});
    }
    return j;
}

} // namespace rulehaz
