#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

#include "rulehaz/boosting.hpp"
#include "rulehaz/cox.hpp"
#include "rulehaz/error.hpp"
#include "rulehaz/serialization.hpp"
#include "rulehaz/tree.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace rulehaz;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

} // namespace

TEST_CASE("cox_gradient hand example against finite differences") {
    std::vector<double> t{1, 2, 3};
    std::vector<int> d{1, 1, 0};
    Eigen::VectorXd f = Eigen::VectorXd::Zero(3);
    const auto g = cox_gradient(t, d, f);
    const auto fd = oracle::finite_difference([&](const Eigen::VectorXd& e) { return oracle::cox_loglik(t, d, e); },
                                              f, 1e-6);
    for (int i = 0; i < 3; ++i) CHECK(g[i] == doctest::Approx(fd[i]).epsilon(1e-8));
    CHECK(g[0] == doctest::Approx(2.0 / 3.0));
    CHECK(g[1] == doctest::Approx(1.0 / 6.0));
    CHECK(g[2] == doctest::Approx(-5.0 / 6.0));
}

TEST_CASE("cox_gradient is zero without events") {
    std::vector<double> t{1, 2, 3, 4};
    std::vector<int> d{0, 0, 0, 0};
    Eigen::VectorXd f(4);
    f << 0.3, -1.0, 2.0, 0.0;
    CHECK(cox_gradient(t, d, f).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cox_gradient matches finite differences on random tied instances") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> size(2, 20), tie(1, 6);
    std::normal_distribution<double> norm;
    std::bernoulli_distribution ev(0.7);
    for (int inst = 0; inst < 100; ++inst) {
        const int n = size(rng);
        std::vector<double> t(static_cast<std::size_t>(n));
        std::vector<int> d(static_cast<std::size_t>(n));
        Eigen::VectorXd f(n);
        for (int i = 0; i < n; ++i) {
            t[static_cast<std::size_t>(i)] = tie(rng);  // many ties
            d[static_cast<std::size_t>(i)] = ev(rng);
            f[i] = norm(rng);
        }
        const auto g = cox_gradient(t, d, f);
        const auto fd = oracle::finite_difference(
            [&](const Eigen::VectorXd& e) { return oracle::cox_loglik(t, d, e); }, f, 1e-5);
        for (int i = 0; i < n; ++i) CHECK(rel_err(g[i], fd[i]) <= 1e-5);
        CHECK(cox_log_partial_likelihood(t, d, f) == doctest::Approx(oracle::cox_loglik(t, d, f)).epsilon(1e-12));
        // With the earliest time an event everyone is in some event's risk set.
        const auto first = std::min_element(t.begin(), t.end()) - t.begin();
        if (d[static_cast<std::size_t>(first)]) CHECK(std::abs(g.sum()) < 1e-10);
    }
}

TEST_CASE("cox_gradient is stable for extreme scores and rejects bad input") {
    std::vector<double> t{1, 2, 3};
    std::vector<int> d{1, 1, 1};
    Eigen::VectorXd big(3), small(3);
    small << 0.1, 0.2, -0.3;
    big = small.array() + 800.0;
    const auto a = cox_gradient(t, d, small), b = cox_gradient(t, d, big);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::VectorXd spread(3);
    spread << -700.0, 0.0, 700.0;
    const auto c = cox_gradient(t, d, spread);
    CHECK(c.allFinite());
    CHECK(c[0] == doctest::Approx(1.0));

    Eigen::VectorXd nan(3);
    nan << 0.0, std::nan(""), 0.0;
    CHECK_THROWS_AS(cox_gradient(t, d, nan), NumericalError);
    std::vector<double> bad{1, -2, 3};
    CHECK_THROWS_AS(cox_gradient(bad, d, small), DataError);
}

TEST_CASE("draw_tree_size") {
    Engine rng(4);
    for (int i = 0; i < 1000; ++i) CHECK(draw_tree_size(2.0, rng) == 2);
    CHECK_THROWS_AS(draw_tree_size(1.5, rng), ConfigError);

    // E[2 + floor(U)], U exponential with mean 2: 2 + sum_{k>=1} exp(-k/2).
    const double series = 2.0 + std::exp(-0.5) / (1.0 - std::exp(-0.5));
    // Independent Monte-Carlo of the stated formula.
    std::mt19937_64 orng(99);
    std::exponential_distribution<double> ex(0.5);
    double mc = 0;
    for (int i = 0; i < 100000; ++i) mc += 2.0 + std::floor(ex(orng));
    mc /= 100000;
    CHECK(std::abs(mc - series) < 0.05);

    double mean = 0;
    std::size_t smallest = 100;
    for (int i = 0; i < 100000; ++i) {
        const auto d = draw_tree_size(4.0, rng);
        smallest = std::min(smallest, d);
        mean += static_cast<double>(d);
    }
    mean /= 100000;
    CHECK(smallest >= 2);
    CHECK(std::abs(mean - series) < 0.05);
}

TEST_CASE("a stump on a treatment-driven target splits on the treatment") {
    // Ten rows: two noise covariates and the treatment in the last column.
    CovariateMatrix x(10, 3);
    std::vector<double> target(10);
    const double noise_a[10] = {0.3, -1.1, 0.8, 0.1, -0.4, 1.5, -0.2, 0.6, -0.9, 0.05};
    const double noise_b[10] = {1, 0, 0, 1, 1, 0, 1, 0, 1, 0};
    for (int i = 0; i < 10; ++i) {
        const int z = i % 2;
        x(i, 0) = noise_a[i];
        x(i, 1) = noise_b[i];
        x(i, 2) = z;
        target[static_cast<std::size_t>(i)] = z ? 1.0 : -1.0;
    }
    std::vector<std::size_t> rows(10);
    std::iota(rows.begin(), rows.end(), 0);

    // Exhaustive oracle over features and midpoints with five rows per side.
    double best = INFINITY;
    std::size_t best_feature = 99;
    double best_cut = 0;
    for (std::size_t j = 0; j < 3; ++j) {
        for (int a = 0; a < 10; ++a) {
            for (int b = 0; b < 10; ++b) {
                const double lo = x(a, static_cast<Eigen::Index>(j)), hi = x(b, static_cast<Eigen::Index>(j));
                if (!(lo < hi)) continue;
                const double cut = 0.5 * (lo + hi);
                double sl = 0, sr = 0, nl = 0, nr = 0;
                for (int i = 0; i < 10; ++i) {
                    if (x(i, static_cast<Eigen::Index>(j)) < cut) { sl += target[static_cast<std::size_t>(i)]; ++nl; }
                    else { sr += target[static_cast<std::size_t>(i)]; ++nr; }
                }
                if (nl < 5 || nr < 5) continue;
                double sse = 0;
                for (int i = 0; i < 10; ++i) {
                    const double m = x(i, static_cast<Eigen::Index>(j)) < cut ? sl / nl : sr / nr;
                    sse += std::pow(target[static_cast<std::size_t>(i)] - m, 2);
                }
                if (sse < best - 1e-12) { best = sse; best_feature = j; best_cut = cut; }
            }
        }
    }
    REQUIRE(best_feature == 2);
    CHECK(best_cut == 0.5);

    const auto tree = fit_gradient_tree(x, target, rows, {2, 5});
    REQUIRE(tree.leaf_count() == 2);
    const auto& root = tree.nodes()[0];
    CHECK(root.feature == 2);
    CHECK(root.threshold == 0.5);
    CHECK(tree.nodes()[static_cast<std::size_t>(root.left)].value == doctest::Approx(-1.0));
    CHECK(tree.nodes()[static_cast<std::size_t>(root.right)].value == doctest::Approx(1.0));
}

TEST_CASE("constant targets give a single leaf") {
    CovariateMatrix x(12, 1);
    for (int i = 0; i < 12; ++i) x(i, 0) = i;
    std::vector<double> target(12, 0.25);
    std::vector<std::size_t> rows(12);
    std::iota(rows.begin(), rows.end(), 0);
    const auto tree = fit_gradient_tree(x, target, rows, {4, 2});
    CHECK(tree.leaf_count() == 1);
    CHECK(tree.rules().empty());
}

TEST_CASE("tree rules are root-to-node paths and respect the depth bound") {
    auto data = fixture::toy(200, 21, 4);
    const auto x = augment_with_treatment(data);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> norm;
    std::vector<double> target(200);
    for (auto& v : target) v = norm(rng);
    std::vector<std::size_t> rows(200);
    std::iota(rows.begin(), rows.end(), 0);
    for (std::size_t leaves : {2u, 3u, 6u, 9u}) {
        const auto tree = fit_gradient_tree(x, target, rows, {leaves, 5});
        CHECK(tree.leaf_count() <= leaves);
        const auto rules = tree.rules();
        CHECK(rules.size() == 2 * (tree.leaf_count() - 1));
        const auto& nodes = tree.nodes();
        for (std::size_t k = 1; k < nodes.size(); ++k) {
            // Walk up to the root, collecting the split taken at each step.
            std::vector<Condition> path;
            for (std::size_t n = k; nodes[n].parent >= 0; n = static_cast<std::size_t>(nodes[n].parent)) {
                const auto& par = nodes[static_cast<std::size_t>(nodes[n].parent)];
                const bool left = par.left == static_cast<int>(n);
                path.push_back(left ? Condition{par.feature, -kInf, par.threshold}
                                    : Condition{par.feature, par.threshold, kInf});
            }
            CHECK(path.size() <= leaves - 1);
            const Rule& r = rules[k - 1];
            CHECK(r.size() <= leaves - 1);
            for (std::size_t i = 0; i < data.rows(); ++i) {
                std::vector<double> row(x.row(static_cast<Eigen::Index>(i)).begin(),
                                        x.row(static_cast<Eigen::Index>(i)).end());
                bool all = true;
                for (const auto& c : path) all = all && c.holds(row[c.feature]);
                CHECK(r.evaluate(row) == static_cast<int>(all));
            }
        }
    }
}

TEST_CASE("boosting rule counts") {
    auto data = fixture::toy(120, 8);
    BoostConfig cfg;
    cfg.num_trees = 1;
    CHECK(boost(data, cfg).candidates.rules.size() == 2);

    cfg.num_trees = 500;
    const auto res = boost(data, cfg);
    CHECK(res.candidates.rules.size() == 1000);
    CHECK(res.candidates.treatment_feature == 3);

    cfg.num_trees = 40;
    cfg.mean_leaves = 4.0;
    const auto varied = boost(data, cfg);
    std::size_t expected = 0;
    for (std::size_t m = 0; m < varied.trees.size(); ++m) {
        expected += 2 * (varied.trees[m].leaf_count() - 1);
        CHECK(varied.candidates.rules_per_tree[m] == 2 * (varied.trees[m].leaf_count() - 1));
    }
    CHECK(varied.candidates.rules.size() == expected);
}

TEST_CASE("boosting is deterministic for a seed") {
    auto data = fixture::toy(100, 2);
    BoostConfig cfg;
    cfg.num_trees = 60;
    cfg.mean_leaves = 3.0;
    cfg.seed = 42;
    const auto a = candidates_to_json(boost(data, cfg).candidates).dump();
    const auto b = candidates_to_json(boost(data, cfg).candidates).dump();
    CHECK(a == b);
    cfg.seed = 43;
    CHECK(candidates_to_json(boost(data, cfg).candidates).dump() != a);
}

TEST_CASE("zero shrinkage keeps the score at zero and the gradient fixed") {
    auto data = fixture::toy(80, 6);
    BoostConfig cfg;
    cfg.num_trees = 15;
    cfg.shrinkage = 0.0;
    cfg.subsample = static_cast<double>(data.rows());  // every tree sees every row
    const auto res = boost(data, cfg);
    CHECK(res.scores.cwiseAbs().maxCoeff() == 0.0);
    const auto g0 = cox_gradient(data.times, data.events, Eigen::VectorXd::Zero(80));
    const auto x = augment_with_treatment(data);
    for (const auto& tree : res.trees) {
        // Same target and same rows at every step: identical trees.
        REQUIRE(tree.nodes().size() == res.trees[0].nodes().size());
        for (std::size_t n = 0; n < tree.nodes().size(); ++n) {
            CHECK(tree.nodes()[n].feature == res.trees[0].nodes()[n].feature);
            CHECK(tree.nodes()[n].threshold == res.trees[0].nodes()[n].threshold);
            CHECK(tree.nodes()[n].value == res.trees[0].nodes()[n].value);
        }
    }
    // Leaf means of the fixed gradient.
    const auto& tree = res.trees[0];
    for (std::size_t n = 0; n < tree.nodes().size(); ++n) {
        if (!tree.nodes()[n].is_leaf()) continue;
        const Rule path = n == 0 ? Rule{} : tree.path_rule(n);
        double s = 0, c = 0;
        for (Eigen::Index i = 0; i < 80; ++i) {
            std::vector<double> row(x.row(i).begin(), x.row(i).end());
            if (path.evaluate(row)) { s += g0[i]; ++c; }
        }
        CHECK(tree.nodes()[n].value == doctest::Approx(s / c).epsilon(1e-12));
    }
}

TEST_CASE("boosting needs events") {
    auto data = fixture::toy(30, 1);
    std::fill(data.events.begin(), data.events.end(), 0);
    CHECK_THROWS_AS(boost(data, BoostConfig{}), DataError);
}
