#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rulehaz {

using CovariateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class FeatureKind { continuous, binary };

const char* to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

/// Right-censored survival data from a two-arm trial.
///
/// Rows are subjects. A covariate-only table (used for prediction) leaves
/// times, events and treatments empty.
struct SurvivalDataset {
    std::vector<double> times;
    std::vector<int> events;
    std::vector<int> treatments;
    CovariateMatrix covariates;
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> feature_kinds;

    std::size_t rows() const { return static_cast<std::size_t>(covariates.rows()); }
    std::size_t features() const { return static_cast<std::size_t>(covariates.cols()); }
    bool has_outcomes() const { return !times.empty() || rows() == 0; }

    std::span<const double> row(std::size_t i) const {
        return {covariates.data() + i * features(), features()};
    }

    // Throws DataError on any broken invariant. With require_outcomes=false only
    // the covariate part is checked.
    void validate(bool require_outcomes = true) const;

    SurvivalDataset subset(std::span<const std::size_t> rows) const;

    std::size_t event_count() const;
};

// Builds a dataset, filling default names (x1..xp) and inferring kinds from the
// values (a column holding only 0 and 1 is binary).
SurvivalDataset make_dataset(std::vector<double> times, std::vector<int> events,
                             std::vector<int> treatments, CovariateMatrix covariates,
                             std::vector<std::string> feature_names = {});

FeatureKind infer_feature_kind(std::span<const double> column);

} // namespace rulehaz
