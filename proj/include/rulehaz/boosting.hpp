#pragma once

#include "rulehaz/dataset.hpp"
#include "rulehaz/rng.hpp"
#include "rulehaz/rule.hpp"
#include "rulehaz/tree.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rulehaz {

struct BoostConfig {
    std::size_t num_trees = 500;
    double mean_leaves = 2.0;   // average terminal-node count per tree
    double shrinkage = 0.01;
    // 0: floor(min(N/2, 100 + 6 sqrt(N))); in (0,1): fraction of N; >= 1: row count.
    double subsample = 0.0;
    std::size_t min_leaf_size = 5;
    std::uint64_t seed = 1;

    void validate() const;
};

std::size_t default_subsample_size(std::size_t n);
std::size_t subsample_size(const BoostConfig& config, std::size_t n);

/// D = 2 + floor(u) with u exponential of mean (mean_leaves - 2); exactly 2
/// when mean_leaves == 2. Throws ConfigError for mean_leaves < 2.
std::size_t draw_tree_size(double mean_leaves, Engine& rng);

/// Rules over the augmented features: covariates 0..p-1, treatment at index p.
struct CandidateRuleSet {
    std::vector<Rule> rules;
    std::size_t treatment_feature = 0;
    std::vector<std::size_t> rules_per_tree;
};

struct BoostResult {
    CandidateRuleSet candidates;
    std::vector<RegressionTree> trees;
    std::vector<std::size_t> drawn_sizes;
    Eigen::VectorXd scores;  // F_M on the training rows
};

/// Covariates with the treatment indicator appended as the last column.
CovariateMatrix augment_with_treatment(const SurvivalDataset& data);

/// Gradient boosting on the Cox partial-likelihood gradient with randomized
/// tree sizes and fresh row subsamples per tree; every tree is decomposed into
/// its root-to-node rules. Pure function of (data, config).
BoostResult boost(const SurvivalDataset& data, const BoostConfig& config);

} // namespace rulehaz
