#include "rulehaz/group_lasso.hpp"

#include "rulehaz/error.hpp"
#include "rulehaz/parallel.hpp"
#include "rulehaz/rng.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace rulehaz {

double neg_log_partial_likelihood(const Eigen::MatrixXd& x, std::span<const double> times,
                                  std::span<const int> events, const Eigen::VectorXd& coef) {
    if (coef.size() != x.cols()) throw DimensionError("coefficient length does not match the design");
    if (!coef.allFinite()) throw NumericalError("non-finite coefficients");
    const CoxRiskSets risk(times, events);
    const Eigen::VectorXd eta = x * coef;
    return -2.0 / static_cast<double>(x.rows()) * risk.log_partial_likelihood(eta);
}

namespace {

// Per column, sum over event times of d_k times the variance of the column
// over the risk set (the Hessian diagonal of minus the log partial
// likelihood at eta = 0).
Eigen::VectorXd hessian_diagonal_at_zero(const Eigen::MatrixXd& x, std::span<const double> times,
                                         std::span<const int> events) {
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(x.cols());
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(x.cols()), s2 = Eigen::VectorXd::Zero(x.cols());
    double count = 0.0;
    for (std::size_t pos = 0; pos < n;) {
        std::size_t end = pos;
        double deaths = 0.0;
        while (end < n && times[order[end]] == times[order[pos]]) {
            const auto row = x.row(static_cast<Eigen::Index>(order[end])).transpose();
            s1 += row;
            s2 += row.cwiseProduct(row);
            count += 1.0;
            deaths += events[order[end]];
            ++end;
        }
        if (deaths > 0.0) {
            const Eigen::VectorXd mean = s1 / count;
            diag += deaths * (s2 / count - mean.cwiseProduct(mean)).cwiseMax(0.0);
        }
        pos = end;
    }
    return diag;
}

} // namespace

CoxGroupLasso::CoxGroupLasso(const Eigen::MatrixXd& x, std::vector<CoefficientGroup> groups,
                             std::span<const double> times, std::span<const int> events)
    : x_(&x), groups_(std::move(groups)), risk_(times, events),
      scale_(2.0 / static_cast<double>(std::max<Eigen::Index>(x.rows(), 1))) {
    if (static_cast<std::size_t>(x.rows()) != risk_.rows()) {
        throw DimensionError("design rows do not match the survival data");
    }
    std::vector<int> seen(static_cast<std::size_t>(x.cols()), 0);
    for (const auto& g : groups_) {
        if (g.size == 0 || g.start + g.size > seen.size()) throw DimensionError("group outside the design");
        if (!(g.weight > 0.0)) throw ConfigError("group weights must be positive");
        for (std::size_t c = g.start; c < g.start + g.size; ++c) ++seen[c];
    }
    if (std::any_of(seen.begin(), seen.end(), [](int s) { return s != 1; })) {
        throw DimensionError("every design column must belong to exactly one group");
    }
    metric_ = hessian_diagonal_at_zero(x, times, events) * scale_;
    const double top = metric_.size() ? metric_.maxCoeff() : 0.0;
    const double floor = top > 0.0 ? 1e-6 * top : 1.0;
    for (const auto& g : groups_) {
        auto seg = metric_.segment(static_cast<Eigen::Index>(g.start), static_cast<Eigen::Index>(g.size));
        seg.setConstant(std::max(seg.maxCoeff(), floor));
    }
}

Eigen::VectorXd CoxGroupLasso::linear_predictor(const Eigen::VectorXd& coef) const {
    const auto nonzero = (coef.array() != 0.0).count();
    if (4 * nonzero > coef.size()) return (*x_) * coef;
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(x_->rows());
    for (Eigen::Index c = 0; c < coef.size(); ++c) {
        if (coef[c] != 0.0) eta.noalias() += coef[c] * x_->col(c);
    }
    return eta;
}

double CoxGroupLasso::loss(const Eigen::VectorXd& coef) const {
    return loss_at(linear_predictor(coef));
}

double CoxGroupLasso::loss_and_gradient(const Eigen::VectorXd& coef, Eigen::VectorXd& grad) const {
    return loss_and_gradient_at(linear_predictor(coef), grad);
}

double CoxGroupLasso::loss_at(const Eigen::VectorXd& eta) const {
    return -scale_ * risk_.log_partial_likelihood(eta);
}

double CoxGroupLasso::loss_and_gradient_at(const Eigen::VectorXd& eta, Eigen::VectorXd& grad) const {
    Eigen::VectorXd score;
    const double ll = risk_.score(eta, score);
    grad.noalias() = -scale_ * (x_->transpose() * score);
    return -scale_ * ll;
}

double CoxGroupLasso::penalty(const Eigen::VectorXd& coef) const {
    double p = 0.0;
    for (const auto& g : groups_) {
        p += g.weight * coef.segment(static_cast<Eigen::Index>(g.start), static_cast<Eigen::Index>(g.size)).norm();
    }
    return p;
}

double CoxGroupLasso::objective(const Eigen::VectorXd& coef, double lambda) const {
    return loss(coef) + lambda * penalty(coef);
}

double CoxGroupLasso::lambda_max() const {
    Eigen::VectorXd grad;
    loss_and_gradient(Eigen::VectorXd::Zero(x_->cols()), grad);
    double lmax = 0.0;
    for (const auto& g : groups_) {
        const double norm =
            grad.segment(static_cast<Eigen::Index>(g.start), static_cast<Eigen::Index>(g.size)).norm();
        lmax = std::max(lmax, norm / g.weight);
    }
    return lmax;
}

void CoxGroupLasso::prox(Eigen::VectorXd& v, double threshold) const {
    if (threshold <= 0.0) return;
    for (const auto& g : groups_) {
        auto seg = v.segment(static_cast<Eigen::Index>(g.start), static_cast<Eigen::Index>(g.size));
        const double norm = seg.norm();
        const double cut = threshold * g.weight;
        if (norm <= cut) {
            seg.setZero();
        } else {
            seg *= 1.0 - cut / norm;
        }
    }
}

void CoxGroupLasso::prox(Eigen::VectorXd& v, double threshold, const Eigen::VectorXd& metric) const {
    if (threshold <= 0.0) return;
    for (const auto& g : groups_) {
        auto seg = v.segment(static_cast<Eigen::Index>(g.start), static_cast<Eigen::Index>(g.size));
        const double norm = seg.norm();
        const double cut = threshold * g.weight / metric[static_cast<Eigen::Index>(g.start)];
        if (norm <= cut) {
            seg.setZero();
        } else {
            seg *= 1.0 - cut / norm;
        }
    }
}

double CoxGroupLasso::kkt_residual(const Eigen::VectorXd& coef, double lambda) const {
    Eigen::VectorXd grad;
    loss_and_gradient(coef, grad);
    return kkt_residual(coef, grad, lambda);
}

double CoxGroupLasso::kkt_residual(const Eigen::VectorXd& coef, const Eigen::VectorXd& grad, double lambda) const {
    double worst = 0.0;
    for (const auto& g : groups_) {
        const auto b = coef.segment(static_cast<Eigen::Index>(g.start), static_cast<Eigen::Index>(g.size));
        const auto gg = grad.segment(static_cast<Eigen::Index>(g.start), static_cast<Eigen::Index>(g.size));
        const double bn = b.norm();
        double r = 0.0;
        if (bn == 0.0) {
            r = std::max(0.0, gg.norm() - lambda * g.weight);
        } else {
            r = (gg + (lambda * g.weight / bn) * b).norm();
        }
        worst = std::max(worst, r);
    }
    return worst;
}

std::size_t CoxGroupLasso::active_groups(const Eigen::VectorXd& coef) const {
    std::size_t n = 0;
    for (const auto& g : groups_) {
        n += !coef.segment(static_cast<Eigen::Index>(g.start), static_cast<Eigen::Index>(g.size)).isZero(0.0);
    }
    return n;
}

void PathConfig::validate() const {
    if (lambdas.empty()) {
        if (num_lambdas == 0) throw ConfigError("lambda path needs at least one value");
        if (!(min_ratio > 0.0 && min_ratio <= 1.0)) throw ConfigError("lambda min ratio must lie in (0, 1]");
    }
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] >= 0.0) || !std::isfinite(lambdas[i])) throw ConfigError("lambdas must be finite and >= 0");
        if (i > 0 && lambdas[i] > lambdas[i - 1]) throw ConfigError("lambdas must be nonincreasing");
    }
    if (!(tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");
    if (max_iterations == 0) throw ConfigError("max iterations must be positive");
}

SolveResult solve_at(const CoxGroupLasso& problem, double lambda, const Eigen::VectorXd& start,
                     const PathConfig& config, double lipschitz_guess) {
    SolveResult res;
    const auto p = static_cast<Eigen::Index>(problem.columns());
    Eigen::VectorXd x = start.size() == p ? start : Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta_x = problem.linear_predictor(x);
    double fx = problem.loss_at(eta_x) + lambda * problem.penalty(x);
    if (!std::isfinite(fx)) throw NumericalError("non-finite objective at the starting point");

    const Eigen::VectorXd& metric = problem.metric();
    double lip = lipschitz_guess > 0.0 ? lipschitz_guess : 1.0;
    // Linear predictors travel with their points so y never needs a product.
    Eigen::VectorXd y = x, eta_y = eta_x, x_prev = x, eta_prev = eta_x, gy, z, eta_z, d, gx;
    double t = 1.0;
    bool restarted = true;
    std::size_t stalled = 0;

    auto kkt_ok = [&]() {
        if (config.kkt_tolerance <= 0.0) return true;
        problem.loss_and_gradient_at(eta_x, gx);
        return problem.kkt_residual(x, gx, lambda) <= config.kkt_tolerance;
    };

    // Near the optimum the objective changes by O(step^2) and stops resolving
    // progress in double precision. Plain proximal steps at the backtracked
    // Lipschitz estimate still contract towards the KKT point, so they are
    // judged by the KKT residual instead.
    auto polish = [&]() {
        problem.loss_and_gradient_at(eta_x, gx);
        double best = problem.kkt_residual(x, gx, lambda);
        Eigen::VectorXd best_x = x, best_eta = eta_x, gz;
        std::size_t since_best = 0;
        for (std::size_t k = 0; k < 5000 && best > config.kkt_tolerance && since_best < 50; ++k) {
            z = x - gx.cwiseQuotient(metric) / lip;
            problem.prox(z, lambda / lip, metric);
            eta_z = problem.linear_predictor(z);
            problem.loss_and_gradient_at(eta_z, gz);
            const double r = problem.kkt_residual(z, gz, lambda);
            if (!std::isfinite(r)) break;
            x.swap(z);
            eta_x.swap(eta_z);
            gx.swap(gz);
            if (r < best) {
                best = r;
                best_x = x;
                best_eta = eta_x;
                since_best = 0;
            } else {
                ++since_best;
            }
        }
        x = std::move(best_x);
        eta_x = std::move(best_eta);
        fx = problem.loss_at(eta_x) + lambda * problem.penalty(x);
        return best <= config.kkt_tolerance;
    };

    for (std::size_t it = 1; it <= config.max_iterations; ++it) {
        res.iterations = it;
        const double fy = problem.loss_and_gradient_at(eta_y, gy);
        double fz = 0.0;
        for (int bt = 0;; ++bt) {
            z = y - gy.cwiseQuotient(metric) / lip;
            problem.prox(z, lambda / lip, metric);
            d = z - y;
            eta_z = problem.linear_predictor(z);
            fz = problem.loss_at(eta_z);
            const double model = fy + gy.dot(d) + 0.5 * lip * d.cwiseAbs2().dot(metric);
            if (fz <= model + 1e-13 * std::abs(fy) || bt > 60) break;
            lip *= 2.0;
        }
        const double obj_z = fz + lambda * problem.penalty(z);

        if (!(obj_z <= fx)) {
            // Momentum overshoot: restart from the best point. A plain proximal
            // step from x cannot increase the objective beyond rounding.
            if (restarted) {
                res.converged = kkt_ok() || polish();
                break;
            }
            y = x;
            eta_y = eta_x;
            t = 1.0;
            restarted = true;
            continue;
        }
        assert(obj_z <= fx);
        const double rel = (fx - obj_z) / std::max(1.0, std::abs(obj_z));
        // Gradient-based adaptive restart: drop momentum when the step
        // points against the previous direction of travel.
        const bool against = (y - z).dot(z - x) > 0.0;
        x_prev.swap(x);
        eta_prev.swap(eta_x);
        x = z;
        eta_x = eta_z;
        fx = obj_z;
        if (against) {
            y = x;
            eta_y = eta_x;
            t = 1.0;
        } else {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double mom = (t - 1.0) / t_next;
            y = x + mom * (x - x_prev);
            eta_y = eta_x + mom * (eta_x - eta_prev);
            t = t_next;
        }
        restarted = against;

        if (rel < config.tolerance) {
            ++stalled;
            if ((config.kkt_tolerance <= 0.0 || stalled % 10 == 1) && kkt_ok()) {
                res.converged = true;
                break;
            }
        }
    }
    res.coef = std::move(x);
    res.objective = fx;
    res.step_lipschitz = lip;
    return res;
}

bool FitPath::all_converged() const {
    return std::all_of(converged.begin(), converged.end(), [](bool c) { return c; });
}

std::vector<double> lambda_grid(double lambda_max, std::size_t count, double min_ratio) {
    std::vector<double> grid(count);
    if (count == 1) {
        grid[0] = lambda_max;
        return grid;
    }
    for (std::size_t i = 0; i < count; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(count - 1);
        grid[i] = lambda_max * std::pow(min_ratio, frac);
    }
    grid[0] = lambda_max;
    return grid;
}

namespace {

CoxGroupLasso make_problem(const Eigen::MatrixXd& x, const std::vector<CoefficientGroup>& groups,
                           std::span<const double> times, std::span<const int> events,
                           const PathConfig& config) {
    auto g = groups;
    if (!config.group_weights.empty()) {
        if (config.group_weights.size() != g.size()) throw ConfigError("group weight override has the wrong length");
        for (std::size_t i = 0; i < g.size(); ++i) g[i].weight = config.group_weights[i];
    }
    return CoxGroupLasso(x, std::move(g), times, events);
}

FitPath run_path(const CoxGroupLasso& problem, const std::vector<double>& lambdas, const PathConfig& config) {
    FitPath path;
    path.lambdas = lambdas;
    const auto p = static_cast<Eigen::Index>(problem.columns());
    path.coefficients.setZero(p, static_cast<Eigen::Index>(lambdas.size()));
    const double lmax = problem.lambda_max();

    Eigen::VectorXd coef = Eigen::VectorXd::Zero(p);
    double lip = 0.0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const double lambda = lambdas[k];
        if (lambda >= lmax && lambda > 0.0) {
            coef.setZero();
            path.objective.push_back(problem.loss(coef));
            path.iterations.push_back(0);
            path.converged.push_back(true);
        } else {
            auto res = solve_at(problem, lambda, coef, config, lip > 0.0 ? 0.5 * lip : 0.0);
            coef = res.coef;
            lip = res.step_lipschitz;
            path.objective.push_back(res.objective);
            path.iterations.push_back(res.iterations);
            path.converged.push_back(res.converged);
        }
        path.coefficients.col(static_cast<Eigen::Index>(k)) = coef;
        path.active_groups.push_back(problem.active_groups(coef));
        path.kkt.push_back(problem.kkt_residual(coef, lambda));
    }
    return path;
}

std::vector<double> resolve_grid(const CoxGroupLasso& problem, const PathConfig& config) {
    if (!config.lambdas.empty()) return config.lambdas;
    return lambda_grid(problem.lambda_max(), config.num_lambdas, config.min_ratio);
}

} // namespace

FitPath solve_path(const Eigen::MatrixXd& x, const std::vector<CoefficientGroup>& groups,
                   std::span<const double> times, std::span<const int> events,
                   const PathConfig& config) {
    config.validate();
    const auto problem = make_problem(x, groups, times, events, config);
    if (problem.risk_sets().event_count() == 0) throw DataError("the penalized Cox fit needs at least one event");
    return run_path(problem, resolve_grid(problem, config), config);
}

std::vector<std::size_t> stratified_folds(std::span<const int> events, std::size_t folds,
                                          std::uint64_t seed) {
    const std::size_t n = events.size();
    if (folds < 2) throw ConfigError("cross-validation needs at least two folds");
    if (folds > n) throw ConfigError("more folds than rows");
    std::size_t total_events = 0;
    for (int e : events) total_events += e == 1;

    for (std::uint64_t attempt = 0; attempt < 5; ++attempt) {
        Engine rng = substream(seed, attempt, stream_tag::folds);
        std::vector<std::size_t> with, without;
        for (std::size_t i = 0; i < n; ++i) (events[i] ? with : without).push_back(i);
        std::shuffle(with.begin(), with.end(), rng);
        std::shuffle(without.begin(), without.end(), rng);

        std::vector<std::size_t> label(n);
        std::size_t next = 0;
        for (auto i : with) label[i] = next++ % folds;
        for (auto i : without) label[i] = next++ % folds;

        std::vector<std::size_t> fold_events(folds, 0);
        for (auto i : with) ++fold_events[label[i]];
        bool ok = true;
        for (std::size_t f = 0; f < folds; ++f) {
            if (total_events - fold_events[f] == 0) ok = false;
            if (total_events >= folds && fold_events[f] == 0) ok = false;
        }
        if (ok) return label;
    }
    throw DataError("could not form cross-validation folds with events after 5 attempts");
}

FitPath cross_validate(const Eigen::MatrixXd& x, const std::vector<CoefficientGroup>& groups,
                       std::span<const double> times, std::span<const int> events,
                       const PathConfig& path_config, const CvConfig& cv) {
    path_config.validate();
    const auto full = make_problem(x, groups, times, events, path_config);
    if (full.risk_sets().event_count() == 0) throw DataError("the penalized Cox fit needs at least one event");
    const auto labels = stratified_folds(events, cv.folds, cv.seed);
    const auto grid = resolve_grid(full, path_config);

    FitPath path = run_path(full, grid, path_config);
    path.folds = cv.folds;

    const std::size_t nl = grid.size();
    std::vector<std::vector<double>> deviance(cv.folds, std::vector<double>(nl, 0.0));
    parallel_for(cv.folds, [&](std::size_t f) {
        std::vector<std::size_t> train;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] != f) train.push_back(i);
        }
        Eigen::MatrixXd xt(static_cast<Eigen::Index>(train.size()), x.cols());
        std::vector<double> tt;
        std::vector<int> et;
        for (std::size_t r = 0; r < train.size(); ++r) {
            xt.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(train[r]));
            tt.push_back(times[train[r]]);
            et.push_back(events[train[r]]);
        }
        PathConfig fold_config = path_config;
        fold_config.kkt_tolerance = cv.fold_kkt_tolerance;
        const auto fold_problem = make_problem(xt, groups, tt, et, fold_config);
        const FitPath fold_path = run_path(fold_problem, grid, fold_config);
        for (std::size_t k = 0; k < nl; ++k) {
            const Eigen::VectorXd b = fold_path.coefficients.col(static_cast<Eigen::Index>(k));
            const double ll_full = full.risk_sets().log_partial_likelihood(full.linear_predictor(b));
            const double ll_train = fold_problem.risk_sets().log_partial_likelihood(fold_problem.linear_predictor(b));
            deviance[f][k] = -2.0 * (ll_full - ll_train);
        }
    });

    path.cv_mean.assign(nl, 0.0);
    path.cv_se.assign(nl, 0.0);
    const double kf = static_cast<double>(cv.folds);
    for (std::size_t k = 0; k < nl; ++k) {
        double mean = 0.0;
        for (std::size_t f = 0; f < cv.folds; ++f) mean += deviance[f][k];
        mean /= kf;
        double ss = 0.0;
        for (std::size_t f = 0; f < cv.folds; ++f) ss += (deviance[f][k] - mean) * (deviance[f][k] - mean);
        path.cv_mean[k] = mean;
        path.cv_se[k] = std::sqrt(ss / (kf - 1.0) / kf);
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < nl; ++k) {
        if (path.cv_mean[k] < path.cv_mean[best]) best = k;
    }
    std::size_t one_se = best;
    for (std::size_t k = 0; k <= best; ++k) {
        if (path.cv_mean[k] <= path.cv_mean[best] + path.cv_se[best]) {
            one_se = k;
            break;
        }
    }
    path.selected_1se = one_se;
    path.selected = cv.one_standard_error ? one_se : best;
    return path;
}

} // namespace rulehaz
