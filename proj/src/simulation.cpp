#include "rulehaz/simulation.hpp"

#include "rulehaz/error.hpp"
#include "rulehaz/hte.hpp"
#include "rulehaz/linear_term.hpp"
#include "rulehaz/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

namespace rulehaz {

namespace {

const char* main_name(MainEffect m) {
    switch (m) {
    case MainEffect::M1: return "M1";
    case MainEffect::M2: return "M2";
    case MainEffect::M3: return "M3";
    }
    return "?";
}

const char* treat_name(TreatmentEffect t) {
    switch (t) {
    case TreatmentEffect::T1: return "T1";
    case TreatmentEffect::T2: return "T2";
    case TreatmentEffect::T3: return "T3";
    }
    return "?";
}

double ind(bool b) { return b ? 1.0 : 0.0; }
double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void check_width(std::span<const double> x) {
    if (x.size() < kScenarioCovariates) throw DimensionError("scenario functions need 15 covariates");
}

} // namespace

std::string ScenarioSpec::name() const {
    std::string s = std::string(main_name(main)) + "x" + treat_name(treat);
    if (null_effect) s += "-null";
    return s;
}

ScenarioSpec parse_scenario(const std::string& raw) {
    std::string s;
    for (char c : raw) s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    ScenarioSpec spec;
    const std::string null_suffix = "-NULL";
    if (s.size() > null_suffix.size() && s.ends_with(null_suffix)) {
        spec.null_effect = true;
        s.resize(s.size() - null_suffix.size());
    }
    std::string compact;
    for (char c : s) {
        if (c != 'X' && c != '_' && c != '*' && c != ' ') compact += c;
    }
    static const char* valid = "M1xT1, M1xT2, M1xT3, M2xT1, M2xT2, M2xT3, M3xT1, M3xT2, M3xT3";
    if (compact.size() != 4 || compact[0] != 'M' || compact[2] != 'T' || compact[1] < '1' || compact[1] > '3' ||
        compact[3] < '1' || compact[3] > '3') {
        throw ConfigError("unknown scenario '" + raw + "'; expected one of " + valid);
    }
    spec.main = static_cast<MainEffect>(compact[1] - '1');
    spec.treat = static_cast<TreatmentEffect>(compact[3] - '1');
    return spec;
}

std::vector<ScenarioSpec> all_scenarios() {
    std::vector<ScenarioSpec> out;
    for (int m = 0; m < 3; ++m) {
        for (int t = 0; t < 3; ++t) {
            ScenarioSpec s;
            s.main = static_cast<MainEffect>(m);
            s.treat = static_cast<TreatmentEffect>(t);
            out.push_back(s);
        }
    }
    return out;
}

nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
    return {{"scenario", spec.name()}, {"main", main_name(spec.main)}, {"treatment", treat_name(spec.treat)},
            {"n", spec.n}, {"p", kScenarioCovariates}, {"seed", spec.seed}, {"t0", spec.horizon},
            {"max_follow_up", spec.max_follow_up}, {"oracle_draws", spec.oracle_draws},
            {"null_effect", spec.null_effect}};
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("scenario spec must be a JSON object");
    ScenarioSpec spec;
    if (j.contains("scenario")) {
        spec = parse_scenario(j.at("scenario").get<std::string>());
    } else if (j.contains("main") && j.contains("treatment")) {
        spec = parse_scenario(j.at("main").get<std::string>() + "x" + j.at("treatment").get<std::string>());
    } else {
        throw ConfigError("scenario spec needs a \"scenario\" name such as M1xT1");
    }
    spec.n = j.value("n", spec.n);
    spec.seed = j.value("seed", spec.seed);
    spec.horizon = j.value("t0", spec.horizon);
    spec.max_follow_up = j.value("max_follow_up", spec.max_follow_up);
    spec.oracle_draws = j.value("oracle_draws", spec.oracle_draws);
    spec.null_effect = j.value("null_effect", spec.null_effect);
    if (j.value("p", kScenarioCovariates) != kScenarioCovariates) throw ConfigError("scenarios use p = 15");
    return spec;
}

double mu(std::span<const double> x, MainEffect which) {
    check_width(x);
    const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3], x5 = x[4], x6 = x[5];
    switch (which) {
    case MainEffect::M1:
        return 0.5 * x1 + 0.5 * x3 + 0.5 * x5 + 0.5 * x2 + 0.5 * x4 - x6;
    case MainEffect::M2:
        return ind(x1 > -1) - ind(x3 > 0) + ind(x5 > 1) + 0.5 * x2 * x4 - 1.25 * x6;
    case MainEffect::M3:
        return -1.25 * std::sin(x1 * x3) + 2.25 / (1.0 + std::exp(-x5)) - 1.5 * x2 * x4 * x6 - 1.0;
    }
    return 0.0;
}

double tau(std::span<const double> x, TreatmentEffect which) {
    check_width(x);
    const double x5 = x[4], x6 = x[5], x7 = x[6], x8 = x[7], x9 = x[8], x10 = x[9];
    switch (which) {
    case TreatmentEffect::T1:
        return -x5 - 1.5 * std::abs(x7 + x9) + 1.5 * x6 - x8 - x10;
    case TreatmentEffect::T2:
        return -2.0 * ind(x5 > -1) * ind(x7 > 0) - 2.0 * ind(x7 > 0) * ind(x9 > 1) - 2.5 * x6 - x8 + 1.5 * x10;
    case TreatmentEffect::T3:
        return -1.75 * std::sin(x5 * x7) + 3.0 * x5 * logistic(x6 * x9) - 2.0 * x8 * x9 * x10 - 2.0;
    }
    return 0.0;
}

double scenario_tau(std::span<const double> x, const ScenarioSpec& spec) {
    return spec.null_effect ? 0.0 : tau(x, spec.treat);
}

double survival_time(double main_effect, double treatment_effect, int z, double u) {
    if (!(u > 0.0 && u < 1.0)) throw ConfigError("survival inversion needs u in (0, 1)");
    const double eta = main_effect + (static_cast<double>(z) - 0.5) * treatment_effect;
    return std::sqrt(-std::log(u) / std::exp(eta));
}

double sample_survival(std::span<const double> x, int z, double u, const ScenarioSpec& spec) {
    return survival_time(mu(x, spec.main), scenario_tau(x, spec), z, u);
}

double sample_censoring(std::span<const double> x, int z, Engine& rng, double cap) {
    check_width(x);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double eps = noise(rng);
    const double raw = 1.1 * std::exp(1.0 - std::sin(x[0] * x[2]) + 3.0 * (static_cast<double>(z) - 0.5) * x[7] + eps);
    return std::min(raw, cap);
}

double analytic_hte(std::span<const double> x, const ScenarioSpec& spec, double t0) {
    const double m = mu(x, spec.main);
    const double t = scenario_tau(x, spec);
    return std::exp(-t0 * t0 * std::exp(m + 0.5 * t)) - std::exp(-t0 * t0 * std::exp(m - 0.5 * t));
}

double true_hte(std::span<const double> x, const ScenarioSpec& spec, double t0, std::size_t draws, Engine& rng) {
    if (draws == 0) throw ConfigError("the oracle needs at least one draw");
    const double m = mu(x, spec.main);
    const double t = scenario_tau(x, spec);
    // Inverse-transform draws of t* for both arms from one shared u.
    const double rate1 = std::exp(m + 0.5 * t);
    const double rate0 = std::exp(m - 0.5 * t);
    long long treated = 0, control = 0;
    for (std::size_t n = 0; n < draws; ++n) {
        const double e = -std::log(open_uniform(rng));
        treated += std::sqrt(e / rate1) > t0;
        control += std::sqrt(e / rate0) > t0;
    }
    return static_cast<double>(treated - control) / static_cast<double>(draws);
}

SimulatedData simulate(const ScenarioSpec& spec, Engine& rng) {
    const std::size_t n = spec.n;
    const std::size_t p = kScenarioCovariates;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);

    SimulatedData out;
    CovariateMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    std::vector<double> times(n);
    std::vector<int> events(n), treatments(n);
    out.true_times.resize(n);
    out.censor_times.resize(n);
    std::size_t censored = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            // x1, x3, ... (even zero-based index) continuous; x2, x4, ... binary.
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = j % 2 == 0 ? normal(rng) : (coin(rng) ? 1.0 : 0.0);
        }
        const std::span<const double> row(x.data() + i * p, p);
        const int z = coin(rng) ? 1 : 0;
        const double u = open_uniform(rng);
        const double t_star = sample_survival(row, z, u, spec);
        const double c = sample_censoring(row, z, rng, spec.max_follow_up);
        treatments[i] = z;
        out.true_times[i] = t_star;
        out.censor_times[i] = c;
        times[i] = std::min(t_star, c);
        events[i] = t_star < c ? 1 : 0;
        censored += events[i] == 0;
    }
    SurvivalDataset data;
    data.times = std::move(times);
    data.events = std::move(events);
    data.treatments = std::move(treatments);
    data.covariates = std::move(x);
    for (std::size_t j = 0; j < p; ++j) {
        data.feature_names.push_back("x" + std::to_string(j + 1));
        data.feature_kinds.push_back(j % 2 == 0 ? FeatureKind::continuous : FeatureKind::binary);
    }
    data.validate();
    out.data = std::move(data);
    out.censoring_fraction = n ? static_cast<double>(censored) / static_cast<double>(n) : 0.0;
    return out;
}

SimulatedData simulate(const ScenarioSpec& spec) {
    Engine rng = substream(spec.seed, 0, stream_tag::covariates);
    return simulate(spec, rng);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

} // namespace

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("spearman inputs differ in length");
    if (a.size() < 2) return std::nullopt;
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

MetricsRow metrics(std::span<const double> truth, std::span<const double> estimate, std::span<const int> events) {
    if (truth.size() != estimate.size() || truth.size() != events.size()) {
        throw DimensionError("metric inputs differ in length");
    }
    MetricsRow m;
    double sq = 0.0, rel = 0.0;
    std::size_t rel_count = 0;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        agree += sign_of(truth[i]) == sign_of(estimate[i]);
        if (!events[i]) continue;
        ++m.events;
        const double err = truth[i] - estimate[i];
        sq += err * err;
        if (truth[i] == 0.0) {
            ++m.zero_truth_excluded;
            continue;
        }
        rel += err / truth[i];
        ++rel_count;
    }
    if (m.events > 0) m.rmse = std::sqrt(sq / static_cast<double>(m.events));
    if (rel_count > 0) m.abs_rbias = std::abs(rel / static_cast<double>(rel_count));
    m.spearman = spearman(truth, estimate);
    m.correct_classification = truth.empty() ? 0.0 : static_cast<double>(agree) / static_cast<double>(truth.size());
    return m;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
    BenchmarkResult result;
    const std::size_t reps = config.replications;
    const std::size_t total = config.scenarios.size() * reps;
    result.rows.resize(total);

    parallel_for(total, [&](std::size_t slot) {
        const std::size_t s = slot / reps;
        const std::size_t r = slot % reps;
        const ScenarioSpec& spec = config.scenarios[s];
        const std::uint64_t stream = (static_cast<std::uint64_t>(s) << 32) | r;
        BenchmarkRow& row = result.rows[slot];
        row.scenario = spec.name();
        row.replication = r + 1;
        try {
            Engine data_rng = substream(config.seed, stream, stream_tag::replication);
            const SimulatedData train = simulate(spec, data_rng);
            const SimulatedData test = simulate(spec, data_rng);
            row.censoring_fraction = train.censoring_fraction;

            FitConfig fit = config.fit;
            Engine seeds = substream(config.seed, stream, stream_tag::boosting);
            fit.boost.seed = seeds();
            fit.cv.seed = seeds();
            const FitOutcome outcome = fit_model(train.data, fit);
            row.lambda = outcome.model.lambda_selected;
            for (std::size_t k = 0; k < outcome.model.coef.alpha.size(); ++k) {
                row.active_treatment_groups += outcome.model.coef.alpha[k] != 0.0;
            }
            for (std::size_t j = 0; j < outcome.model.coef.alpha_star.size(); ++j) {
                row.active_treatment_groups += outcome.model.coef.alpha_star[j] != 0.0;
            }

            Engine oracle_rng = substream(config.seed, stream, stream_tag::oracle);
            std::vector<double> truth(test.data.rows()), estimate(test.data.rows());
            for (std::size_t i = 0; i < test.data.rows(); ++i) {
                truth[i] = true_hte(test.data.row(i), spec, spec.horizon, spec.oracle_draws, oracle_rng);
                estimate[i] = predict_hte(outcome.model, test.data.row(i), spec.horizon).hte;
            }
            row.metrics = metrics(truth, estimate, test.data.events);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.message = e.what();
        }
    });
    result.summary = summarize_rows(result.rows);
    return result;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : "NA"; }

std::string csv_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

} // namespace

BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("benchmark configuration must be a JSON object");
    BenchmarkConfig c;
    try {
        for (const auto& item : j.items()) {
            static const char* known[] = {"scenarios", "replications", "seed", "n", "t0", "oracle_draws",
                                          "null_effect", "fit"};
            if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known)) {
                throw ConfigError("unknown benchmark option '" + item.key() + "'");
            }
        }
        const auto scen = j.value("scenarios", nlohmann::json("all"));
        if (scen.is_string() && scen.get<std::string>() == "all") {
            c.scenarios = all_scenarios();
        } else if (scen.is_string()) {
            c.scenarios = {parse_scenario(scen.get<std::string>())};
        } else {
            for (const auto& s : scen) c.scenarios.push_back(parse_scenario(s.get<std::string>()));
        }
        c.replications = j.value("replications", c.replications);
        c.seed = j.value("seed", c.seed);
        for (auto& s : c.scenarios) {
            s.n = j.value("n", s.n);
            s.horizon = j.value("t0", s.horizon);
            s.oracle_draws = j.value("oracle_draws", s.oracle_draws);
            s.null_effect = j.value("null_effect", false) || s.null_effect;
            s.seed = c.seed;
        }
        if (j.contains("fit")) c.fit = fit_config_from_json(j.at("fit"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad benchmark option: ") + e.what());
    }
    if (c.scenarios.empty()) throw ConfigError("no scenarios selected");
    if (c.replications == 0) throw ConfigError("replications must be positive");
    for (const auto& s : c.scenarios) {
        if (s.n < 10) throw ConfigError("simulated sets need at least 10 rows");
        if (!(s.horizon > 0.0)) throw ConfigError("t0 must be positive");
        if (s.oracle_draws == 0) throw ConfigError("oracle_draws must be positive");
    }
    return c;
}

std::string truth_csv(const ScenarioSpec& spec, const SurvivalDataset& covariates) {
    if (covariates.features() != kScenarioCovariates) throw DataError("truth needs covariates x1..x15");
    std::string out = "id,truth,analytic";
    for (const auto& n : covariates.feature_names) out += "," + n;
    out += "\n";
    for (std::size_t i = 0; i < covariates.rows(); ++i) {
        Engine rng = substream(spec.seed, i, stream_tag::oracle);
        const auto x = covariates.row(i);
        out += fmt::format("{},{},{}", i + 1, true_hte(x, spec, spec.horizon, spec.oracle_draws, rng),
                           analytic_hte(x, spec, spec.horizon));
        for (double v : x) out += fmt::format(",{}", v);
        out += "\n";
    }
    return out;
}

std::string benchmark_csv(const BenchmarkResult& result) {
    std::string out =
        "scenario,replication,method,status,rmse,abs_rbias,spearman,correct_classification,"
        "test_events,zero_truth_excluded,censoring_fraction,lambda,active_treatment_groups,message\n";
    for (const auto& r : result.rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.scenario, r.replication, r.method,
                           r.ok ? "ok" : "failed", opt(r.metrics.rmse), opt(r.metrics.abs_rbias),
                           opt(r.metrics.spearman), r.ok ? fmt::format("{}", r.metrics.correct_classification) : "NA",
                           r.metrics.events, r.metrics.zero_truth_excluded, r.censoring_fraction, r.lambda,
                           r.active_treatment_groups, csv_text(r.message));
    }
    return out;
}

nlohmann::json summarize_rows(const std::vector<BenchmarkRow>& rows) {
    nlohmann::json summary = nlohmann::json::object();
    std::vector<std::string> order;
    for (const auto& r : rows) {
        if (std::find(order.begin(), order.end(), r.scenario) == order.end()) order.push_back(r.scenario);
    }
    auto stats = [](std::vector<double> v) {
        nlohmann::json j;
        j["count"] = v.size();
        if (v.empty()) return j;
        std::sort(v.begin(), v.end());
        j["min"] = v.front();
        j["q1"] = empirical_quantile(v, 0.25);
        j["median"] = empirical_quantile(v, 0.5);
        j["q3"] = empirical_quantile(v, 0.75);
        j["max"] = v.back();
        return j;
    };
    for (const auto& name : order) {
        std::vector<double> rmse, rbias, rho, cls;
        std::size_t failed = 0;
        for (const auto& r : rows) {
            if (r.scenario != name) continue;
            if (!r.ok) {
                ++failed;
                continue;
            }
            if (r.metrics.rmse) rmse.push_back(*r.metrics.rmse);
            if (r.metrics.abs_rbias) rbias.push_back(*r.metrics.abs_rbias);
            if (r.metrics.spearman) rho.push_back(*r.metrics.spearman);
            cls.push_back(r.metrics.correct_classification);
        }
        summary[name] = {{"method", "PROP"}, {"failed", failed}, {"rmse", stats(rmse)},
                         {"abs_rbias", stats(rbias)}, {"spearman", stats(rho)},
                         {"correct_classification", stats(cls)}};
    }
    return summary;
}

} // namespace rulehaz
