#pragma once

#include "rulehaz/boosting.hpp"
#include "rulehaz/rule.hpp"

#include <vector>

namespace rulehaz {

/// Which treatment values a rule admits.
enum class ArmSet { both, control_only, treated_only, none };

ArmSet admitted_arms(const Rule& rule, std::size_t treatment_feature);

/// Main-effect rules (no restriction on the treatment indicator) and
/// treatment-effect rules (indicator pinned to one arm, condition stripped).
/// Both lists keep input order and are not de-duplicated.
struct PartitionedRules {
    std::vector<Rule> main_rules;
    std::vector<Rule> treat_rules;
};

/// Throws DataError for a rule that admits neither arm.
PartitionedRules partition(const CandidateRuleSet& candidates);
PartitionedRules partition(const std::vector<Rule>& rules, std::size_t treatment_feature);

} // namespace rulehaz
