#include "rulehaz/rule.hpp"

#include "rulehaz/error.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace rulehaz {

void Rule::add(const Condition& c) {
    if (!(c.lower < c.upper)) throw DataError("rule condition must satisfy lower < upper");
    for (auto& existing : conditions_) {
        if (existing.feature != c.feature) continue;
        const double lo = std::max(existing.lower, c.lower);
        const double hi = std::min(existing.upper, c.upper);
        if (!(lo < hi)) throw DataError("merged rule condition is empty");
        existing.lower = lo;
        existing.upper = hi;
        return;
    }
    conditions_.push_back(c);
}

Rule Rule::without(std::size_t feature) const {
    Rule out;
    for (const auto& c : conditions_) {
        if (c.feature != feature) out.conditions_.push_back(c);
    }
    return out;
}

const Condition* Rule::find(std::size_t feature) const {
    for (const auto& c : conditions_) {
        if (c.feature == feature) return &c;
    }
    return nullptr;
}

std::size_t Rule::max_feature() const {
    std::size_t m = 0;
    for (const auto& c : conditions_) m = std::max(m, c.feature);
    return m;
}

int Rule::evaluate(std::span<const double> x) const {
    for (const auto& c : conditions_) {
        if (c.feature >= x.size()) {
            throw DimensionError("rule references feature " + std::to_string(c.feature) +
                                 " but the covariate vector has " + std::to_string(x.size()) + " entries");
        }
        if (!c.holds(x[c.feature])) return 0;
    }
    return 1;
}

std::vector<Condition> Rule::canonical() const {
    auto out = conditions_;
    std::sort(out.begin(), out.end(),
              [](const Condition& a, const Condition& b) { return a.feature < b.feature; });
    return out;
}

std::vector<int> evaluate_rows(const Rule& rule, const SurvivalDataset& data) {
    std::vector<int> out(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) out[i] = rule.evaluate(data.row(i));
    return out;
}

double rule_support(const Rule& rule, const SurvivalDataset& data) {
    if (data.rows() == 0) throw DataError("support of a rule on an empty dataset is undefined");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) hits += rule.evaluate(data.row(i));
    return static_cast<double>(hits) / static_cast<double>(data.rows());
}

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

} // namespace

std::vector<Rule> deduplicate(const std::vector<Rule>& rules) {
    std::set<std::vector<Condition>, CanonicalLess> seen;
    std::vector<Rule> out;
    for (const auto& r : rules) {
        if (seen.insert(r.canonical()).second) out.push_back(r);
    }
    return out;
}

std::string format_threshold(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string format_rule(const Rule& rule, std::span<const std::string> feature_names) {
    if (rule.empty()) return "(all)";
    std::string out;
    auto name = [&](std::size_t j) {
        return j < feature_names.size() ? feature_names[j] : "x" + std::to_string(j + 1);
    };
    auto append = [&](const std::string& piece) {
        if (!out.empty()) out += " & ";
        out += piece;
    };
    for (const auto& c : rule.conditions()) {
        if (c.lower != -kInf) append(name(c.feature) + ">=" + format_threshold(c.lower));
        if (c.upper != kInf) append(name(c.feature) + "<" + format_threshold(c.upper));
    }
    return out;
}

} // namespace rulehaz
