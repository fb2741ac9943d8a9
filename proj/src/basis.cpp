#include "rulehaz/basis.hpp"

#include "rulehaz/error.hpp"

#include <cmath>
#include <optional>
#include <set>

namespace rulehaz {

namespace {

struct CanonicalLess {
    bool operator()(const std::vector<Condition>& a, const std::vector<Condition>& b) const {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                            [](const Condition& x, const Condition& y) {
                                                if (x.feature != y.feature) return x.feature < y.feature;
                                                if (x.lower != y.lower) return x.lower < y.lower;
                                                return x.upper < y.upper;
                                            });
    }
};

struct ArmHits {
    std::size_t total = 0;
    std::size_t treated = 0;
    std::size_t control = 0;
};

ArmHits count_hits(const Rule& rule, const SurvivalDataset& data) {
    ArmHits h;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (!rule.evaluate(data.row(i))) continue;
        ++h.total;
        if (data.treatments[i] == 1) ++h.treated; else ++h.control;
    }
    return h;
}

// The single-condition rule covering exactly the complement of `rule`, if any.
std::optional<Rule> complement(const Rule& rule) {
    if (rule.size() != 1) return std::nullopt;
    const Condition& c = rule.conditions().front();
    Rule out;
    if (std::isinf(c.lower) && !std::isinf(c.upper)) {
        out.add_greater_equal(c.feature, c.upper);
    } else if (!std::isinf(c.lower) && std::isinf(c.upper)) {
        out.add_less(c.feature, c.lower);
    } else {
        return std::nullopt;
    }
    return out;
}

} // namespace

BasisSet make_basis(const std::vector<Rule>& main_rules, const std::vector<Rule>& treat_rules,
                    const SurvivalDataset& data, double winsor_q, BasisReport* report) {
    data.validate();
    const std::size_t n = data.rows();
    if (n < 2) throw DataError("at least two rows are needed to build a basis");

    BasisSet basis;
    BasisReport rep;
    rep.main_candidates = main_rules.size();
    rep.treat_candidates = treat_rules.size();

    const auto main_unique = deduplicate(main_rules);
    rep.main_unique = main_unique.size();
    std::set<std::vector<Condition>, CanonicalLess> kept;
    for (const auto& r : main_unique) {
        const auto hits = count_hits(r, data);
        if (hits.total == 0 || hits.total == n) continue;
        // r and its complement add up to one, which the partial likelihood
        // cannot see; keeping both only adds a flat direction.
        if (const auto c = complement(r); c && kept.count(c->canonical())) {
            ++rep.main_complements;
            continue;
        }
        kept.insert(r.canonical());
        basis.main_rules.push_back(r);
    }

    const auto treat_unique = deduplicate(treat_rules);
    rep.treat_unique = treat_unique.size();
    for (const auto& r : treat_unique) {
        const auto hits = count_hits(r, data);
        if (hits.total == 0 || hits.total == n) continue;
        // A pair with an identically zero column cannot be selected jointly.
        if (hits.treated == 0 || hits.control == 0) continue;
        basis.treat_rules.push_back(r);
    }

    std::vector<double> column(n);
    for (std::size_t j = 0; j < data.features(); ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = data.covariates(i, j);
        auto term = fit_linear_term(column, winsor_q, j);
        if (term) {
            basis.linear_terms.push_back(*term);
        } else {
            ++rep.linear_excluded;
        }
    }
    rep.main_retained = basis.main_rules.size();
    rep.treat_retained = basis.treat_rules.size();
    rep.linear_retained = basis.linear_terms.size();
    if (report) *report = rep;
    return basis;
}

std::vector<CoefficientGroup> block_groups(std::size_t main_rules, std::size_t linear_terms,
                                           std::size_t treat_rules) {
    std::vector<CoefficientGroup> groups;
    std::size_t col = 0;
    for (std::size_t k = 0; k < main_rules + linear_terms; ++k) groups.push_back({col++, 1, 1.0});
    for (std::size_t k = 0; k < treat_rules + linear_terms; ++k) {
        groups.push_back({col, 2, std::sqrt(2.0)});
        col += 2;
    }
    return groups;
}

Design build_design(const SurvivalDataset& data, const BasisSet& basis) {
    if (basis.empty()) throw DimensionError("cannot build a design from an empty basis");
    const std::size_t n = data.rows();
    if (data.treatments.size() != n) throw DimensionError("design needs a treatment indicator per row");
    for (const auto& t : basis.linear_terms) {
        if (t.feature >= data.features()) throw DimensionError("linear term feature out of range");
    }

    Design d;
    d.main_rule_count = basis.main_rules.size();
    d.linear_count = basis.linear_terms.size();
    d.treat_rule_count = basis.treat_rules.size();
    d.x.setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(basis.column_count()));
    d.groups = block_groups(d.main_rule_count, d.linear_count, d.treat_rule_count);

    for (std::size_t i = 0; i < n; ++i) {
        const auto row = data.row(i);
        const auto r = static_cast<Eigen::Index>(i);
        const double z = data.treatments[i];
        Eigen::Index c = 0;
        for (const auto& rule : basis.main_rules) d.x(r, c++) = rule.evaluate(row);
        for (const auto& term : basis.linear_terms) d.x(r, c++) = term.evaluate(row);
        for (const auto& rule : basis.treat_rules) {
            const double v = rule.evaluate(row);
            d.x(r, c++) = z * v;
            d.x(r, c++) = (1.0 - z) * v;
        }
        for (const auto& term : basis.linear_terms) {
            const double v = term.evaluate(row);
            d.x(r, c++) = z * v;
            d.x(r, c++) = (1.0 - z) * v;
        }
    }
    return d;
}

} // namespace rulehaz
