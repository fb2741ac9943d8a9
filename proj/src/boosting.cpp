#include "rulehaz/boosting.hpp"

#include "rulehaz/cox.hpp"
#include "rulehaz/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rulehaz {

void BoostConfig::validate() const {
    if (num_trees == 0) throw ConfigError("number of trees must be positive");
    if (!(mean_leaves >= 2.0) || !std::isfinite(mean_leaves)) {
        throw ConfigError("mean tree size must be at least 2");
    }
    if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) throw ConfigError("shrinkage must lie in [0, 1]");
    if (!(subsample >= 0.0) || !std::isfinite(subsample)) throw ConfigError("subsample must be nonnegative");
    if (min_leaf_size == 0) throw ConfigError("minimum leaf size must be positive");
}

std::size_t default_subsample_size(std::size_t n) {
    const double nd = static_cast<double>(n);
    return static_cast<std::size_t>(std::floor(std::min(nd / 2.0, 100.0 + 6.0 * std::sqrt(nd))));
}

std::size_t subsample_size(const BoostConfig& config, std::size_t n) {
    std::size_t size = 0;
    if (config.subsample == 0.0) {
        size = default_subsample_size(n);
    } else if (config.subsample < 1.0) {
        size = static_cast<std::size_t>(std::floor(config.subsample * static_cast<double>(n)));
    } else {
        size = static_cast<std::size_t>(config.subsample);
    }
    return std::clamp<std::size_t>(size, 1, n);
}

std::size_t draw_tree_size(double mean_leaves, Engine& rng) {
    if (!(mean_leaves >= 2.0)) throw ConfigError("mean tree size must be at least 2");
    if (mean_leaves == 2.0) return 2;
    std::exponential_distribution<double> expo(1.0 / (mean_leaves - 2.0));
    return 2 + static_cast<std::size_t>(std::floor(expo(rng)));
}

CovariateMatrix augment_with_treatment(const SurvivalDataset& data) {
    CovariateMatrix x(data.covariates.rows(), data.covariates.cols() + 1);
    x.leftCols(data.covariates.cols()) = data.covariates;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        x(static_cast<Eigen::Index>(i), data.covariates.cols()) = data.treatments[i];
    }
    return x;
}

BoostResult boost(const SurvivalDataset& data, const BoostConfig& config) {
    config.validate();
    data.validate();
    const std::size_t n = data.rows();
    if (n < 2) throw DataError("boosting needs at least two rows");
    if (data.event_count() == 0) throw DataError("boosting needs at least one event");

    const CovariateMatrix x = augment_with_treatment(data);
    const CoxRiskSets risk(data.times, data.events);
    const std::size_t h = subsample_size(config, n);
    const TreeConfig base_tree{2, config.min_leaf_size};

    BoostResult out;
    out.candidates.treatment_feature = data.features();
    out.scores = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
    std::vector<std::size_t> sample(h);
    Eigen::VectorXd grad;

    for (std::size_t m = 0; m < config.num_trees; ++m) {
        Engine rng = substream(config.seed, m, stream_tag::boosting);
        risk.score(out.scores, grad);
        const std::size_t leaves = draw_tree_size(config.mean_leaves, rng);
        std::sample(all_rows.begin(), all_rows.end(), sample.begin(), h, rng);

        TreeConfig tc = base_tree;
        tc.max_leaves = leaves;
        RegressionTree tree = fit_gradient_tree(x, {grad.data(), n}, sample, tc);

        if (config.shrinkage > 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                out.scores[static_cast<Eigen::Index>(i)] +=
                    config.shrinkage * tree.predict({x.data() + i * x.cols(), static_cast<std::size_t>(x.cols())});
            }
        }
        auto rules = tree.rules();
        out.candidates.rules_per_tree.push_back(rules.size());
        for (auto& r : rules) out.candidates.rules.push_back(std::move(r));
        out.drawn_sizes.push_back(leaves);
        out.trees.push_back(std::move(tree));
    }
    return out;
}

} // namespace rulehaz
