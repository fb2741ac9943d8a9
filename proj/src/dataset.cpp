#include "rulehaz/dataset.hpp"

#include "rulehaz/error.hpp"

#include <cmath>
#include <string>

namespace rulehaz {

const char* to_string(FeatureKind kind) {
    return kind == FeatureKind::binary ? "binary" : "continuous";
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "binary") return FeatureKind::binary;
    if (s == "continuous") return FeatureKind::continuous;
    throw DataError("unknown feature kind '" + s + "'");
}

FeatureKind infer_feature_kind(std::span<const double> column) {
    for (double v : column) {
        if (v != 0.0 && v != 1.0) return FeatureKind::continuous;
    }
    return FeatureKind::binary;
}

void SurvivalDataset::validate(bool require_outcomes) const {
    const std::size_t n = rows();
    const std::size_t p = features();
    if (feature_names.size() != p || feature_kinds.size() != p) {
        throw DimensionError("feature metadata does not match the covariate matrix width");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            if (!std::isfinite(covariates(i, j))) {
                throw DataError("missing or non-finite covariate '" + feature_names[j] +
                                "' in row " + std::to_string(i + 1));
            }
        }
    }
    if (!require_outcomes) return;
    if (times.size() != n || events.size() != n || treatments.size() != n) {
        throw DimensionError("time/event/treatment length does not match the number of rows");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(std::isfinite(times[i]) && times[i] > 0.0)) {
            throw DataError("time must be positive and finite (row " + std::to_string(i + 1) + ")");
        }
        if (events[i] != 0 && events[i] != 1) {
            throw DataError("event must be 0 or 1 (row " + std::to_string(i + 1) + ")");
        }
        if (treatments[i] != 0 && treatments[i] != 1) {
            throw DataError("treatment must be 0 or 1 (row " + std::to_string(i + 1) + ")");
        }
    }
}

SurvivalDataset SurvivalDataset::subset(std::span<const std::size_t> idx) const {
    SurvivalDataset out;
    out.feature_names = feature_names;
    out.feature_kinds = feature_kinds;
    out.covariates.resize(static_cast<Eigen::Index>(idx.size()), covariates.cols());
    const bool outcomes = !times.empty();
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const std::size_t i = idx[r];
        if (i >= rows()) throw DimensionError("subset row index out of range");
        out.covariates.row(static_cast<Eigen::Index>(r)) = covariates.row(static_cast<Eigen::Index>(i));
        if (outcomes) {
            out.times.push_back(times[i]);
            out.events.push_back(events[i]);
            out.treatments.push_back(treatments[i]);
        }
    }
    return out;
}

std::size_t SurvivalDataset::event_count() const {
    std::size_t count = 0;
    for (int e : events) count += e == 1;
    return count;
}

SurvivalDataset make_dataset(std::vector<double> times, std::vector<int> events,
                             std::vector<int> treatments, CovariateMatrix covariates,
                             std::vector<std::string> feature_names) {
    SurvivalDataset data;
    data.times = std::move(times);
    data.events = std::move(events);
    data.treatments = std::move(treatments);
    data.covariates = std::move(covariates);
    const auto p = static_cast<std::size_t>(data.covariates.cols());
    if (feature_names.empty()) {
        for (std::size_t j = 0; j < p; ++j) feature_names.push_back("x" + std::to_string(j + 1));
    }
    data.feature_names = std::move(feature_names);
    std::vector<double> column(data.rows());
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < data.rows(); ++i) column[i] = data.covariates(i, j);
        data.feature_kinds.push_back(infer_feature_kind(column));
    }
    data.validate(!data.times.empty());
    return data;
}

} // namespace rulehaz
