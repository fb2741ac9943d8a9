#include "rulehaz/linear_term.hpp"

#include "rulehaz/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rulehaz {

double empirical_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw DataError("quantile of an empty column");
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::optional<LinearTerm> fit_linear_term(std::span<const double> column, double q,
                                          std::size_t feature) {
    if (column.size() < 2) throw ConfigError("a linear term needs at least two rows");
    if (!(q >= 0.0 && q < 0.5)) throw ConfigError("winsor quantile must lie in [0, 0.5)");

    std::vector<double> sorted(column.begin(), column.end());
    std::sort(sorted.begin(), sorted.end());

    LinearTerm term;
    term.feature = feature;
    term.lower = empirical_quantile(sorted, q);
    term.upper = empirical_quantile(sorted, 1.0 - q);

    const double n = static_cast<double>(column.size());
    double mean = 0.0;
    for (double v : column) mean += term.winsorize(v);
    mean /= n;
    double ss = 0.0;
    for (double v : column) {
        const double d = term.winsorize(v) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) return std::nullopt;
    term.scale = kLinearTermTargetStd / sd;
    return term;
}

} // namespace rulehaz
