#pragma once

#include "rulehaz/dataset.hpp"
#include "rulehaz/rule.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace rulehaz {

struct TreeNode {
    int parent = -1;
    int left = -1;   // x[feature] < threshold
    int right = -1;  // x[feature] >= threshold
    std::size_t feature = 0;
    double threshold = 0.0;
    double value = 0.0;
    std::size_t count = 0;

    bool is_leaf() const { return left < 0; }
};

/// Least-squares regression tree. Node 0 is the root; children of a split
/// node are appended as a (left, right) pair.
class RegressionTree {
public:
    explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t leaf_count() const;
    double predict(std::span<const double> x) const;

    /// The root-to-node conjunction for one node.
    Rule path_rule(std::size_t node) const;

    /// One rule per non-root node, in node order: 2(D - 1) rules for D leaves.
    std::vector<Rule> rules() const;

private:
    std::vector<TreeNode> nodes_;
};

struct TreeConfig {
    std::size_t max_leaves = 2;
    std::size_t min_leaf_size = 5;
};

/// Grows a tree best-first (the leaf with the largest SSE decrease is split
/// next) on the given rows until it has max_leaves leaves or no admissible
/// split remains. Split candidates are midpoints between consecutive distinct
/// values within the node; both children need min_leaf_size rows. Leaf values
/// are mean targets over the leaf's rows.
RegressionTree fit_gradient_tree(const CovariateMatrix& features, std::span<const double> targets,
                                 std::span<const std::size_t> rows, const TreeConfig& config);

} // namespace rulehaz
