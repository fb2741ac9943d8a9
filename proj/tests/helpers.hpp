// Small fixtures shared by the unit tests.
#pragma once

#include "rulehaz/dataset.hpp"
#include "rulehaz/rng.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace fixture {

// Exponential times with hazard exp(0.7 x1 - 0.5 z + 0.8 z x2), uniform censoring.
inline rulehaz::SurvivalDataset toy(std::size_t n, std::uint64_t seed, std::size_t p = 3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> norm;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    rulehaz::CovariateMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    std::vector<double> t(n);
    std::vector<int> d(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < p; ++j) {
            x(r, static_cast<Eigen::Index>(j)) = j == 1 ? (coin(rng) ? 1.0 : 0.0) : norm(rng);
        }
        z[i] = coin(rng);
        const double eta = 0.7 * x(r, 0) - 0.5 * z[i] + 0.8 * z[i] * x(r, 1);
        const double ts = -std::log(1.0 - unif(rng)) / std::exp(eta);
        const double c = 3.0 * unif(rng);
        t[i] = std::max(std::min(ts, c), 1e-6);
        d[i] = ts <= c;
    }
    return rulehaz::make_dataset(t, d, z, x);
}

} // namespace fixture
