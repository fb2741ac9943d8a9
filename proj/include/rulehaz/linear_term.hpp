#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace rulehaz {

/// Winsorized, rescaled covariate: scale * clamp(x, lower, upper).
struct LinearTerm {
    std::size_t feature = 0;
    double lower = 0.0;
    double upper = 0.0;
    double scale = 1.0;

    double winsorize(double x) const { return x < lower ? lower : (x > upper ? upper : x); }
    double evaluate(double x) const { return scale * winsorize(x); }
    double evaluate(std::span<const double> row) const { return evaluate(row[feature]); }
};

inline constexpr double kLinearTermTargetStd = 0.4;
inline constexpr double kDefaultWinsorQuantile = 0.025;

/// Empirical quantile with linear interpolation between order statistics
/// (h = (n-1)q). `sorted` must be ascending and nonempty.
double empirical_quantile(std::span<const double> sorted, double q);

/// Fits winsor bounds at the q and 1-q quantiles and the 0.4/std scale, with
/// the population standard deviation taken after winsorizing. Returns nullopt
/// when the winsorized column is constant (the term is excluded).
/// Throws ConfigError unless N >= 2 and 0 <= q < 0.5.
std::optional<LinearTerm> fit_linear_term(std::span<const double> column, double q,
                                          std::size_t feature = 0);

} // namespace rulehaz
