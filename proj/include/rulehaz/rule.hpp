#pragma once

#include "rulehaz/dataset.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace rulehaz {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// x[feature] in [lower, upper).
struct Condition {
    std::size_t feature = 0;
    double lower = -kInf;
    double upper = kInf;

    bool holds(double value) const { return value >= lower && value < upper; }
    bool operator==(const Condition&) const = default;
};

/// Conjunction of half-open interval conditions, at most one per feature.
///
/// Conditions keep the order in which features were first constrained (for a
/// tree-derived rule that is root-to-leaf order), which is also the display
/// order. Equality ignores that order.
class Rule {
public:
    Rule() = default;

    // Intersects with any existing condition on the same feature. Throws
    // DataError if the intersection is empty.
    void add(const Condition& c);
    void add_less(std::size_t feature, double threshold) { add({feature, -kInf, threshold}); }
    void add_greater_equal(std::size_t feature, double threshold) { add({feature, threshold, kInf}); }

    // Returns a copy without any condition on `feature`.
    Rule without(std::size_t feature) const;

    const std::vector<Condition>& conditions() const { return conditions_; }
    const Condition* find(std::size_t feature) const;
    bool empty() const { return conditions_.empty(); }
    std::size_t size() const { return conditions_.size(); }
    std::size_t max_feature() const;

    // Throws DimensionError when x is too short.
    int evaluate(std::span<const double> x) const;

    // Conditions sorted by feature; used for duplicate detection.
    std::vector<Condition> canonical() const;

    bool operator==(const Rule& other) const { return canonical() == other.canonical(); }

private:
    std::vector<Condition> conditions_;
};

inline int evaluate_rule(const Rule& rule, std::span<const double> x) { return rule.evaluate(x); }

/// Fraction of rows on which the rule fires. Throws DataError on an empty dataset.
double rule_support(const Rule& rule, const SurvivalDataset& data);

std::vector<int> evaluate_rows(const Rule& rule, const SurvivalDataset& data);

/// Stable de-duplication: the first occurrence of each distinct rule is kept.
std::vector<Rule> deduplicate(const std::vector<Rule>& rules);

/// "cd40<266.5 & age>=39.5"; an empty rule renders as "(all)".
std::string format_rule(const Rule& rule, std::span<const std::string> feature_names);

std::string format_threshold(double v);

} // namespace rulehaz
