#include "rulehaz/partition.hpp"

#include "rulehaz/error.hpp"

namespace rulehaz {

ArmSet admitted_arms(const Rule& rule, std::size_t treatment_feature) {
    const Condition* c = rule.find(treatment_feature);
    if (!c) return ArmSet::both;
    const bool control = c->holds(0.0);
    const bool treated = c->holds(1.0);
    if (control && treated) return ArmSet::both;
    if (control) return ArmSet::control_only;
    if (treated) return ArmSet::treated_only;
    return ArmSet::none;
}

PartitionedRules partition(const std::vector<Rule>& rules, std::size_t treatment_feature) {
    PartitionedRules out;
    for (const auto& rule : rules) {
        switch (admitted_arms(rule, treatment_feature)) {
        case ArmSet::both:
            out.main_rules.push_back(rule.without(treatment_feature));
            break;
        case ArmSet::control_only:
        case ArmSet::treated_only:
            out.treat_rules.push_back(rule.without(treatment_feature));
            break;
        case ArmSet::none:
            throw DataError("candidate rule excludes both treatment arms");
        }
    }
    return out;
}

PartitionedRules partition(const CandidateRuleSet& candidates) {
    return partition(candidates.rules, candidates.treatment_feature);
}

} // namespace rulehaz
