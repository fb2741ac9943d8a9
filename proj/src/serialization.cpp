#include "rulehaz/serialization.hpp"

#include "rulehaz/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace rulehaz {

namespace {

using nlohmann::json;

json bound(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

double read_bound(const json& j, double infinite) {
    if (j.is_null()) return infinite;
    if (!j.is_number()) throw DataError("rule bound must be a number or null");
    return j.get<double>();
}

std::vector<double> read_vector(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) throw DataError(std::string("model field '") + key + "' missing");
    return j.at(key).get<std::vector<double>>();
}

template <class F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed JSON document: ") + e.what());
    }
}

} // namespace

json rule_to_json(const Rule& rule) {
    json out = json::array();
    for (const auto& c : rule.conditions()) {
        out.push_back({{"feature", c.feature}, {"lower", bound(c.lower)}, {"upper", bound(c.upper)}});
    }
    return out;
}

Rule rule_from_json(const json& j) {
    return guarded([&] {
        if (!j.is_array()) throw DataError("a rule must be an array of conditions");
        Rule rule;
        for (const auto& c : j) {
            Condition cond;
            cond.feature = c.at("feature").get<std::size_t>();
            cond.lower = read_bound(c.at("lower"), -kInf);
            cond.upper = read_bound(c.at("upper"), kInf);
            rule.add(cond);
        }
        return rule;
    });
}

namespace {

json rules_to_json(const std::vector<Rule>& rules) {
    json out = json::array();
    for (const auto& r : rules) out.push_back(rule_to_json(r));
    return out;
}

std::vector<Rule> rules_from_json(const json& j) {
    if (!j.is_array()) throw DataError("rule list must be an array");
    std::vector<Rule> out;
    for (const auto& r : j) out.push_back(rule_from_json(r));
    return out;
}

} // namespace

json basis_to_json(const BasisSet& basis) {
    json linear = json::array();
    for (const auto& t : basis.linear_terms) {
        linear.push_back({{"feature", t.feature}, {"lower", t.lower}, {"upper", t.upper}, {"scale", t.scale}});
    }
    return {{"main_rules", rules_to_json(basis.main_rules)},
            {"treatment_rules", rules_to_json(basis.treat_rules)},
            {"linear_terms", linear}};
}

BasisSet basis_from_json(const json& j) {
    return guarded([&] {
        BasisSet b;
        b.main_rules = rules_from_json(j.at("main_rules"));
        b.treat_rules = rules_from_json(j.at("treatment_rules"));
        for (const auto& t : j.at("linear_terms")) {
            LinearTerm term;
            term.feature = t.at("feature").get<std::size_t>();
            term.lower = t.at("lower").get<double>();
            term.upper = t.at("upper").get<double>();
            term.scale = t.at("scale").get<double>();
            if (!(term.lower <= term.upper)) throw DataError("linear term bounds are inverted");
            b.linear_terms.push_back(term);
        }
        return b;
    });
}

json candidates_to_json(const CandidateRuleSet& set) {
    return {{"treatment_feature", set.treatment_feature},
            {"rules_per_tree", set.rules_per_tree},
            {"rules", rules_to_json(set.rules)}};
}

CandidateRuleSet candidates_from_json(const json& j) {
    return guarded([&] {
        CandidateRuleSet set;
        set.treatment_feature = j.at("treatment_feature").get<std::size_t>();
        set.rules_per_tree = j.value("rules_per_tree", std::vector<std::size_t>{});
        set.rules = rules_from_json(j.at("rules"));
        return set;
    });
}

json model_to_json(const HteModel& model) {
    json features = json::array();
    for (std::size_t j = 0; j < model.features(); ++j) {
        features.push_back({{"name", model.feature_names[j]}, {"kind", to_string(model.feature_kinds[j])}});
    }
    const auto& c = model.coef;
    return {{"schema_version", kModelSchemaVersion},
            {"kind", "rulehaz-model"},
            {"features", features},
            {"basis", basis_to_json(model.basis)},
            {"coefficients",
             {{"theta", c.theta},
              {"theta_star", c.theta_star},
              {"alpha", c.alpha},
              {"beta", c.beta},
              {"alpha_star", c.alpha_star},
              {"beta_star", c.beta_star}}},
            {"baseline", {{"event_times", model.baseline.event_times}, {"increments", model.baseline.increments}}},
            {"max_time", model.max_time},
            {"lambda_selected", model.lambda_selected},
            {"fit_report", model.fit_report}};
}

HteModel model_from_json(const json& j) {
    return guarded([&] {
        if (!j.is_object() || !j.contains("schema_version")) throw DataError("not a model file (no schema_version)");
        const int version = j.at("schema_version").get<int>();
        if (version != kModelSchemaVersion) {
            throw DataError("unsupported model schema_version " + std::to_string(version) + " (expected " +
                            std::to_string(kModelSchemaVersion) + ")");
        }
        HteModel m;
        for (const auto& f : j.at("features")) {
            m.feature_names.push_back(f.at("name").get<std::string>());
            m.feature_kinds.push_back(feature_kind_from_string(f.at("kind").get<std::string>()));
        }
        m.basis = basis_from_json(j.at("basis"));
        const auto& c = j.at("coefficients");
        m.coef.theta = read_vector(c, "theta");
        m.coef.theta_star = read_vector(c, "theta_star");
        m.coef.alpha = read_vector(c, "alpha");
        m.coef.beta = read_vector(c, "beta");
        m.coef.alpha_star = read_vector(c, "alpha_star");
        m.coef.beta_star = read_vector(c, "beta_star");
        const auto& b = j.at("baseline");
        m.baseline.event_times = read_vector(b, "event_times");
        m.baseline.increments = read_vector(b, "increments");
        m.max_time = j.at("max_time").get<double>();
        m.lambda_selected = j.at("lambda_selected").get<double>();
        m.fit_report = j.value("fit_report", json::object());

        const auto& basis = m.basis;
        const std::size_t p = m.features();
        if (m.coef.theta.size() != basis.main_rules.size() || m.coef.alpha.size() != basis.treat_rules.size() ||
            m.coef.beta.size() != basis.treat_rules.size() || m.coef.theta_star.size() != basis.linear_terms.size() ||
            m.coef.alpha_star.size() != basis.linear_terms.size() ||
            m.coef.beta_star.size() != basis.linear_terms.size()) {
            throw DataError("coefficient blocks do not match the basis");
        }
        if (m.baseline.event_times.size() != m.baseline.increments.size()) {
            throw DataError("baseline event times and increments differ in length");
        }
        for (const auto* rules : {&basis.main_rules, &basis.treat_rules}) {
            for (const auto& r : *rules) {
                if (!r.empty() && r.max_feature() >= p) throw DataError("rule references an unknown feature");
            }
        }
        for (const auto& t : basis.linear_terms) {
            if (t.feature >= p) throw DataError("linear term references an unknown feature");
        }
        m.check_paired_selection();
        return m;
    });
}

std::string dump_model(const HteModel& model) { return model_to_json(model).dump(2) + "\n"; }

HteModel parse_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    return model_from_json(j);
}

void save_model(const HteModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file " + path);
    out << dump_model(model);
    if (!out) throw DataError("failed writing model file " + path);
}

HteModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read model file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

} // namespace rulehaz
