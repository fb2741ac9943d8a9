#pragma once

#include "rulehaz/dataset.hpp"
#include "rulehaz/model.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace rulehaz {

/// I_k = |alpha_k - beta_k| sqrt(s_k (1 - s_k)), s_k the rule's support on `data`.
double rule_importance(const HteModel& model, const SurvivalDataset& data, std::size_t k);

struct LinearImportance {
    double aggregate = 0.0;             // mean of per_subject
    std::vector<double> per_subject;    // |alpha*_j - beta*_j| |l_j(x_i) - mean l_j|
};

/// For linear term j (index into the basis' linear terms).
LinearImportance linear_importance(const HteModel& model, const SurvivalDataset& data, std::size_t j);

/// Per covariate: its linear-term importance plus I_k / m_k for every active
/// treatment rule k that mentions it (m_k distinct features in rule k).
std::vector<double> variable_importance(const HteModel& model, const SurvivalDataset& data);

struct RuleReportRow {
    std::size_t rule = 0;  // index into basis.treat_rules
    std::string condition;
    double importance = 0.0;  // normalized, top row of the report = 100
    double raw_importance = 0.0;
    double hazard_ratio = 1.0;
    double support = 0.0;
};

struct LinearReportRow {
    std::size_t term = 0;  // index into basis.linear_terms
    std::string feature;
    double importance = 0.0;
    double raw_importance = 0.0;
    double hazard_ratio = 1.0;  // per unit of the normalized term
};

struct MainEffectRow {
    std::string condition;
    double coefficient = 0.0;
    double support = 0.0;
};

struct VariableImportanceRow {
    std::string feature;
    double importance = 0.0;  // normalized to max 100 (all zero stays zero)
    double raw_importance = 0.0;
};

struct RuleReport {
    std::vector<RuleReportRow> rules;           // active treatment rules, importance descending
    std::vector<LinearReportRow> linear_terms;  // active linear pairs, importance descending
    std::vector<MainEffectRow> main_effects;    // active main-effect rules and linear terms
    std::vector<VariableImportanceRow> variables;  // in feature order
};

/// Rule and linear importances share one normalization: the largest of
/// either kind maps to 100.
RuleReport build_report(const HteModel& model, const SurvivalDataset& data);

std::string report_text(const RuleReport& report);
std::string report_rules_csv(const RuleReport& report);
std::string report_linear_csv(const RuleReport& report);
std::string report_variables_csv(const RuleReport& report);
nlohmann::json report_json(const RuleReport& report);

} // namespace rulehaz
