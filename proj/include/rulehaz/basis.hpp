#pragma once

#include "rulehaz/dataset.hpp"
#include "rulehaz/linear_term.hpp"
#include "rulehaz/rule.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace rulehaz {

/// The fitted model's vocabulary.
struct BasisSet {
    std::vector<Rule> main_rules;
    std::vector<Rule> treat_rules;
    std::vector<LinearTerm> linear_terms;

    bool empty() const { return main_rules.empty() && treat_rules.empty() && linear_terms.empty(); }
    std::size_t column_count() const {
        return main_rules.size() + linear_terms.size() + 2 * (treat_rules.size() + linear_terms.size());
    }
};

struct BasisReport {
    std::size_t main_candidates = 0;
    std::size_t main_unique = 0;
    std::size_t main_complements = 0;  // dropped because their complement was kept
    std::size_t main_retained = 0;
    std::size_t treat_candidates = 0;
    std::size_t treat_unique = 0;
    std::size_t treat_retained = 0;
    std::size_t linear_retained = 0;
    std::size_t linear_excluded = 0;
};

/// De-duplicates both rule lists, drops rules that are constant on the
/// training rows (support 0 or 1), drops a main-effect rule when its logical
/// complement is already in the basis, drops treatment rules that never fire
/// in one of the arms, and fits a winsorized linear term for every covariate.
BasisSet make_basis(const std::vector<Rule>& main_rules, const std::vector<Rule>& treat_rules,
                    const SurvivalDataset& data, double winsor_q, BasisReport* report = nullptr);

struct CoefficientGroup {
    std::size_t start = 0;
    std::size_t size = 1;
    double weight = 1.0;
};

/// Dense design with column blocks
///   [main rules | main linear | (z r, (1-z) r) pairs | (z l, (1-z) l) pairs]
/// and one penalty group per main column and per pair.
struct Design {
    Eigen::MatrixXd x;
    std::vector<CoefficientGroup> groups;
    std::size_t main_rule_count = 0;
    std::size_t linear_count = 0;
    std::size_t treat_rule_count = 0;

    std::size_t main_linear_offset() const { return main_rule_count; }
    std::size_t treat_rule_offset() const { return main_rule_count + linear_count; }
    std::size_t treat_linear_offset() const { return treat_rule_offset() + 2 * treat_rule_count; }
    std::size_t columns() const { return static_cast<std::size_t>(x.cols()); }
};

/// Group map for the block layout: singletons with weight 1, then pairs with weight sqrt(2).
std::vector<CoefficientGroup> block_groups(std::size_t main_rules, std::size_t linear_terms,
                                           std::size_t treat_rules);

/// Throws DimensionError for an empty basis or a dataset without treatments.
Design build_design(const SurvivalDataset& data, const BasisSet& basis);

} // namespace rulehaz
