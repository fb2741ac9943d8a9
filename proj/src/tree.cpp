#include "rulehaz/tree.hpp"

#include "rulehaz/error.hpp"

#include <algorithm>
#include <numeric>

namespace rulehaz {

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double RegressionTree::predict(std::span<const double> x) const {
    std::size_t k = 0;
    while (!nodes_[k].is_leaf()) {
        const auto& n = nodes_[k];
        k = static_cast<std::size_t>(x[n.feature] < n.threshold ? n.left : n.right);
    }
    return nodes_[k].value;
}

Rule RegressionTree::path_rule(std::size_t node) const {
    std::vector<std::size_t> path;
    for (int k = static_cast<int>(node); k > 0; k = nodes_[static_cast<std::size_t>(k)].parent) {
        path.push_back(static_cast<std::size_t>(k));
    }
    Rule rule;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        const auto& child = nodes_[*it];
        const auto& parent = nodes_[static_cast<std::size_t>(child.parent)];
        if (parent.left == static_cast<int>(*it)) {
            rule.add_less(parent.feature, parent.threshold);
        } else {
            rule.add_greater_equal(parent.feature, parent.threshold);
        }
    }
    return rule;
}

std::vector<Rule> RegressionTree::rules() const {
    std::vector<Rule> out;
    for (std::size_t k = 1; k < nodes_.size(); ++k) out.push_back(path_rule(k));
    return out;
}

namespace {

struct Split {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

struct Candidate {
    std::vector<std::size_t> rows;
    Split split;
};

Split best_split(const CovariateMatrix& x, std::span<const double> targets,
                 const std::vector<std::size_t>& rows, std::size_t min_leaf) {
    Split best;
    const std::size_t n = rows.size();
    if (n < 2 * min_leaf) return best;

    double total = 0.0;
    double total_sq = 0.0;
    for (auto i : rows) {
        total += targets[i];
        total_sq += targets[i] * targets[i];
    }
    const double parent_term = total * total / static_cast<double>(n);
    const double min_gain = 1e-12 * std::max(total_sq, 1e-300);

    std::vector<std::pair<double, double>> pairs(n);
    for (std::size_t j = 0; j < static_cast<std::size_t>(x.cols()); ++j) {
        for (std::size_t r = 0; r < n; ++r) pairs[r] = {x(rows[r], j), targets[rows[r]]};
        std::sort(pairs.begin(), pairs.end());
        double left_sum = 0.0;
        for (std::size_t r = 0; r + 1 < n; ++r) {
            left_sum += pairs[r].second;
            const std::size_t nl = r + 1;
            const std::size_t nr = n - nl;
            if (nl < min_leaf) continue;
            if (nr < min_leaf) break;
            const double a = pairs[r].first;
            const double b = pairs[r + 1].first;
            if (!(a < b)) continue;
            const double right_sum = total - left_sum;
            const double gain = left_sum * left_sum / static_cast<double>(nl) +
                                right_sum * right_sum / static_cast<double>(nr) - parent_term;
            if (gain > min_gain && (!best.valid || gain > best.gain)) {
                double c = 0.5 * (a + b);
                if (!(a < c && c <= b)) c = b;
                best = {true, j, c, gain};
            }
        }
    }
    return best;
}

double mean_of(std::span<const double> targets, const std::vector<std::size_t>& rows) {
    double s = 0.0;
    for (auto i : rows) s += targets[i];
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

} // namespace

RegressionTree fit_gradient_tree(const CovariateMatrix& features, std::span<const double> targets,
                                 std::span<const std::size_t> rows, const TreeConfig& config) {
    if (config.max_leaves < 1) throw ConfigError("a tree needs at least one leaf");
    if (targets.size() != static_cast<std::size_t>(features.rows())) {
        throw DimensionError("tree targets do not match the feature rows");
    }
    std::vector<TreeNode> nodes(1);
    std::vector<Candidate> work(1);
    work[0].rows.assign(rows.begin(), rows.end());
    nodes[0].value = mean_of(targets, work[0].rows);
    nodes[0].count = work[0].rows.size();
    work[0].split = best_split(features, targets, work[0].rows, config.min_leaf_size);

    std::size_t leaves = 1;
    while (leaves < config.max_leaves) {
        int pick = -1;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (!nodes[k].is_leaf() || !work[k].split.valid) continue;
            if (pick < 0 || work[k].split.gain > work[static_cast<std::size_t>(pick)].split.gain) {
                pick = static_cast<int>(k);
            }
        }
        if (pick < 0) break;
        const auto k = static_cast<std::size_t>(pick);
        const Split split = work[k].split;

        Candidate left, right;
        for (auto i : work[k].rows) {
            (features(i, split.feature) < split.threshold ? left : right).rows.push_back(i);
        }
        work[k].rows.clear();
        work[k].rows.shrink_to_fit();

        nodes[k].feature = split.feature;
        nodes[k].threshold = split.threshold;
        for (Candidate* child : {&left, &right}) {
            TreeNode node;
            node.parent = pick;
            node.value = mean_of(targets, child->rows);
            node.count = child->rows.size();
            child->split = best_split(features, targets, child->rows, config.min_leaf_size);
            nodes.push_back(node);
            work.push_back(std::move(*child));
        }
        nodes[k].left = static_cast<int>(nodes.size() - 2);
        nodes[k].right = static_cast<int>(nodes.size() - 1);
        ++leaves;
    }
    return RegressionTree(std::move(nodes));
}

} // namespace rulehaz
