#pragma once

#include "rulehaz/dataset.hpp"
#include "rulehaz/pipeline.hpp"
#include "rulehaz/rng.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rulehaz {

enum class MainEffect { M1, M2, M3 };
enum class TreatmentEffect { T1, T2, T3 };

inline constexpr std::size_t kScenarioCovariates = 15;

struct ScenarioSpec {
    MainEffect main = MainEffect::M1;
    TreatmentEffect treat = TreatmentEffect::T1;
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    double horizon = 2.0;
    double max_follow_up = 3.0;
    std::size_t oracle_draws = 100000;
    bool null_effect = false;  // forces tau = 0

    std::string name() const;  // "M1xT1", with a "-null" suffix for null_effect
};

/// Accepts "M1xT1", "M1T1", "M1_T1" (case-insensitive), optionally suffixed
/// "-null". Throws ConfigError listing the nine valid names otherwise.
ScenarioSpec parse_scenario(const std::string& name);
std::vector<ScenarioSpec> all_scenarios();

nlohmann::json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

/// x holds x1..x15 at indices 0..14.
double mu(std::span<const double> x, MainEffect which);
double tau(std::span<const double> x, TreatmentEffect which);
double scenario_tau(std::span<const double> x, const ScenarioSpec& spec);

/// t* = sqrt(-log(u) / exp(mu + (z - 0.5) tau)) under baseline hazard 2t.
/// Throws ConfigError unless 0 < u < 1.
double survival_time(double main_effect, double treatment_effect, int z, double u);
double sample_survival(std::span<const double> x, int z, double u, const ScenarioSpec& spec);

/// min(1.1 exp(1 - sin(x1 x3) + 3 (z - 0.5) x8 + eps), cap), eps ~ N(0,1).
double sample_censoring(std::span<const double> x, int z, Engine& rng, double cap = 3.0);

/// exp(-t0^2 exp(mu + tau/2)) - exp(-t0^2 exp(mu - tau/2)).
double analytic_hte(std::span<const double> x, const ScenarioSpec& spec, double t0);

/// Monte-Carlo difference of arm survival at t0 with one shared uniform
/// stream for both arms.
double true_hte(std::span<const double> x, const ScenarioSpec& spec, double t0, std::size_t draws, Engine& rng);

struct SimulatedData {
    SurvivalDataset data;
    std::vector<double> true_times;
    std::vector<double> censor_times;
    double censoring_fraction = 0.0;
};

/// Odd covariates N(0,1), even Bernoulli(0.5), treatment Bernoulli(0.5);
/// t = min(t*, c), event = I(t* < c).
SimulatedData simulate(const ScenarioSpec& spec, Engine& rng);
SimulatedData simulate(const ScenarioSpec& spec);  // uses spec.seed

struct MetricsRow {
    std::optional<double> rmse;
    std::optional<double> abs_rbias;
    std::optional<double> spearman;
    double correct_classification = 0.0;
    std::size_t events = 0;
    std::size_t zero_truth_excluded = 0;
};

/// Spearman correlation with average ranks for ties; nullopt when either
/// input is constant.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

/// RMSE and AbsRbias over subjects with an event (AbsRbias skips zero truth),
/// Spearman and sign agreement over everyone.
MetricsRow metrics(std::span<const double> truth, std::span<const double> estimate, std::span<const int> events);

struct BenchmarkConfig {
    std::vector<ScenarioSpec> scenarios;
    std::size_t replications = 10;
    std::uint64_t seed = 1;
    FitConfig fit;
};

struct BenchmarkRow {
    std::string scenario;
    std::size_t replication = 0;
    std::string method = "PROP";
    bool ok = false;
    std::string message;
    MetricsRow metrics;
    double censoring_fraction = 0.0;
    double lambda = 0.0;
    std::size_t active_treatment_groups = 0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;
    nlohmann::json summary;
};

/// One row per scenario x replication: simulate train and test sets of size
/// n, fit on train, predict at the scenario horizon on test, score against
/// the Monte-Carlo truth. Failures are recorded and the harness continues.
BenchmarkResult run_benchmark(const BenchmarkConfig& config);

/// Keys: scenarios (list of names or "all"), replications, seed, and the
/// per-scenario overrides n, t0, oracle_draws, null_effect; "fit" holds a fit
/// configuration (see fit_config_from_json).
BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j);

std::string benchmark_csv(const BenchmarkResult& result);

/// id, truth (Monte-Carlo oracle), analytic, then x1..x15, one row per input
/// row. Row i uses its own oracle substream of spec.seed.
std::string truth_csv(const ScenarioSpec& spec, const SurvivalDataset& covariates);

/// Quantiles (min, q1, median, q3, max) of a metric over replications.
nlohmann::json summarize_rows(const std::vector<BenchmarkRow>& rows);

} // namespace rulehaz
