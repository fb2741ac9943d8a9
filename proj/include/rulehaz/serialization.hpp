#pragma once

#include "rulehaz/basis.hpp"
#include "rulehaz/boosting.hpp"
#include "rulehaz/model.hpp"
#include "rulehaz/rule.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace rulehaz {

inline constexpr int kModelSchemaVersion = 1;

/// A rule is an array of {"feature": index, "lower": number|null, "upper": number|null};
/// null stands for an infinite bound.
nlohmann::json rule_to_json(const Rule& rule);
Rule rule_from_json(const nlohmann::json& j);

nlohmann::json basis_to_json(const BasisSet& basis);
BasisSet basis_from_json(const nlohmann::json& j);

nlohmann::json candidates_to_json(const CandidateRuleSet& set);
CandidateRuleSet candidates_from_json(const nlohmann::json& j);

/// Doubles are written with round-trip precision, so a reloaded model
/// predicts exactly what the original did.
nlohmann::json model_to_json(const HteModel& model);
/// Throws DataError on a malformed document or an unknown schema version.
HteModel model_from_json(const nlohmann::json& j);

std::string dump_model(const HteModel& model);  // pretty-printed, trailing newline
HteModel parse_model(const std::string& text);

void save_model(const HteModel& model, const std::string& path);
HteModel load_model(const std::string& path);

} // namespace rulehaz
