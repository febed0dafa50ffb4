#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "isoprob/errors.hpp"
#include "isoprob/posterior.hpp"

namespace isoprob {

namespace {

// g(theta): score of the theta-reweighted model at x. Each evaluation is one
// full training run.
class ScoreCurve {
public:
    ScoreCurve(std::span<const double> x, const WeightedTrainer& trainer,
               const LabeledDataset& dataset)
        : x_(x), trainer_(trainer), dataset_(dataset) {}

    double operator()(double theta) const {
        const ClassWeights w =
            derive_class_weights(theta, dataset_.positive_count(), dataset_.negative_count());
        const double s = trainer_(dataset_, w).score(x_);
        if (!std::isfinite(s)) {
            throw EstimationError("non-finite classifier score at theta=" + std::to_string(theta));
        }
        return s;
    }

private:
    std::span<const double> x_;
    const WeightedTrainer& trainer_;
    const LabeledDataset& dataset_;
};

void check_query_dim(std::span<const double> x, const LabeledDataset& dataset) {
    if (x.size() != dataset.dim()) {
        throw ConfigError("query point has dimension " + std::to_string(x.size()) +
                          ", dataset has dimension " + std::to_string(dataset.dim()));
    }
}

// Bisects a bracket [a, b] with g(a)*g(b) < 0 down to theta tolerance,
// stopping early on a near-zero score. Returns the refined bracket.
template <typename Fn>
BoundaryResult bisect_bracket(const Fn& g, double a, double ga, double b,
                              const EstimatorConfig& config) {
    while (b - a > config.theta_tolerance) {
        const double mid = 0.5 * (a + b);
        const double gm = g(mid);
        if (std::abs(gm) <= config.score_tolerance) {
            return {mid, mid, mid, EstimateStatus::converged};
        }
        if ((gm > 0.0) == (ga > 0.0)) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    return {0.5 * (a + b), a, b, EstimateStatus::converged};
}

}  // namespace

const char* to_string(EstimateStatus status) {
    switch (status) {
        case EstimateStatus::converged: return "converged";
        case EstimateStatus::clamped_low: return "clamped_low";
        case EstimateStatus::clamped_high: return "clamped_high";
        case EstimateStatus::degenerate: return "degenerate";
    }
    return "unknown";
}

void EstimatorConfig::validate() const {
    if (!(0.0 < theta_lo && theta_lo < theta_hi && theta_hi < 1.0)) {
        throw ConfigError("theta bracket must satisfy 0 < lo < hi < 1");
    }
    if (!(theta_tolerance > 0.0)) throw ConfigError("theta_tolerance must be > 0");
    if (!(score_tolerance > 0.0)) throw ConfigError("score_tolerance must be > 0");
}

double posterior_from_theta(double theta_star, double pi_plus) {
    if (!(theta_star > 0.0 && theta_star < 1.0)) {
        throw ConfigError("theta_star must lie in the open unit interval");
    }
    if (!(pi_plus > 0.0 && pi_plus < 1.0)) {
        throw ConfigError("pi_plus must lie in the open unit interval");
    }
    const double odds = ((1.0 - theta_star) * pi_plus) / (theta_star * (1.0 - pi_plus));
    return odds / (1.0 + odds);
}

BoundaryResult find_boundary_theta(std::span<const double> x, const WeightedTrainer& trainer,
                                   const LabeledDataset& dataset, const EstimatorConfig& config) {
    config.validate();
    check_query_dim(x, dataset);
    const ScoreCurve g(x, trainer, dataset);

    const double ga = g(config.theta_lo);
    if (std::abs(ga) <= config.score_tolerance) {
        return {config.theta_lo, config.theta_lo, config.theta_lo, EstimateStatus::converged};
    }
    const double gb = g(config.theta_hi);
    if (std::abs(gb) <= config.score_tolerance) {
        return {config.theta_hi, config.theta_hi, config.theta_hi, EstimateStatus::converged};
    }

    if ((ga > 0.0) == (gb > 0.0)) {
        // Constant sign over the bracket. The score grows with theta (more
        // "+" mass pushes the boundary outward), so a positive score at both
        // ends means the root sits below the bracket and vice versa; the
        // endpoint with the smaller |g| is the nearer one.
        if (std::abs(ga) <= std::abs(gb)) {
            return {config.theta_lo, config.theta_lo, config.theta_hi, EstimateStatus::clamped_low};
        }
        return {config.theta_hi, config.theta_lo, config.theta_hi, EstimateStatus::clamped_high};
    }
    return bisect_bracket(g, config.theta_lo, ga, config.theta_hi, config);
}

std::vector<double> detect_degeneracy(std::span<const double> x, const WeightedTrainer& trainer,
                                      const LabeledDataset& dataset,
                                      const EstimatorConfig& config) {
    config.validate();
    check_query_dim(x, dataset);
    const ScoreCurve g(x, trainer, dataset);

    const int m = std::max(config.degeneracy_scan_points, 2);
    std::vector<double> grid(m), value(m);
    for (int i = 0; i < m; ++i) {
        grid[i] = config.theta_lo +
                  (config.theta_hi - config.theta_lo) * static_cast<double>(i) / (m - 1);
        value[i] = g(grid[i]);
    }

    std::vector<double> roots;
    for (int i = 0; i < m; ++i) {
        if (std::abs(value[i]) <= config.score_tolerance) roots.push_back(grid[i]);
    }
    for (int i = 0; i + 1 < m; ++i) {
        if (std::abs(value[i]) <= config.score_tolerance) continue;
        if (std::abs(value[i + 1]) <= config.score_tolerance) continue;
        if ((value[i] > 0.0) == (value[i + 1] > 0.0)) continue;
        const BoundaryResult r = bisect_bracket(g, grid[i], value[i], grid[i + 1], config);
        roots.push_back(r.theta_star);
    }

    std::sort(roots.begin(), roots.end());
    std::vector<double> unique_roots;
    for (double r : roots) {
        if (unique_roots.empty() || r - unique_roots.back() > config.theta_tolerance) {
            unique_roots.push_back(r);
        }
    }
    return unique_roots;
}

PosteriorEstimate estimate_posterior(std::span<const double> x, const WeightedTrainer& trainer,
                                     const LabeledDataset& dataset,
                                     const EstimatorConfig& config) {
    config.validate();
    check_query_dim(x, dataset);
    const double pi_plus = dataset.positive_proportion();

    const BoundaryResult boundary = find_boundary_theta(x, trainer, dataset, config);
    std::vector<double> roots;
    if (config.degeneracy_scan_points >= 2) {
        roots = detect_degeneracy(x, trainer, dataset, config);
    } else if (boundary.status == EstimateStatus::converged) {
        roots.push_back(boundary.theta_star);
    }

    PosteriorEstimate est;
    est.pi_plus = pi_plus;

    if (roots.size() >= 2) {
        // One query point, several thetas placing a boundary through it: keep
        // every candidate, lead with the root nearest the original proportion.
        est.status = EstimateStatus::degenerate;
        est.all_roots = roots;
        double best = roots.front();
        for (double r : roots) {
            if (std::abs(r - pi_plus) < std::abs(best - pi_plus)) best = r;
        }
        est.theta_star = best;
        est.bracket_lo = std::max(best - 0.5 * config.theta_tolerance, config.theta_lo);
        est.bracket_hi = std::min(best + 0.5 * config.theta_tolerance, config.theta_hi);
        est.probability = posterior_from_theta(best, pi_plus);
        est.interval_lo = posterior_from_theta(roots.back(), pi_plus);
        est.interval_hi = posterior_from_theta(roots.front(), pi_plus);
        return est;
    }

    if (boundary.status == EstimateStatus::converged) {
        est.status = EstimateStatus::converged;
        est.theta_star = boundary.theta_star;
        est.bracket_lo = boundary.bracket_lo;
        est.bracket_hi = boundary.bracket_hi;
        est.probability = posterior_from_theta(boundary.theta_star, pi_plus);
        est.interval_lo = posterior_from_theta(boundary.bracket_hi, pi_plus);
        est.interval_hi = posterior_from_theta(boundary.bracket_lo, pi_plus);
        est.all_roots = {boundary.theta_star};
        return est;
    }

    if (roots.size() == 1) {
        // The endpoint test saw no sign change but the scan still found a
        // crossing (an even number of roots with one outside grid resolution,
        // or a tangency). Trust the refined root.
        const double r = roots.front();
        est.status = EstimateStatus::converged;
        est.theta_star = r;
        est.bracket_lo = std::max(r - 0.5 * config.theta_tolerance, config.theta_lo);
        est.bracket_hi = std::min(r + 0.5 * config.theta_tolerance, config.theta_hi);
        est.probability = posterior_from_theta(r, pi_plus);
        est.interval_lo = posterior_from_theta(est.bracket_hi, pi_plus);
        est.interval_hi = posterior_from_theta(est.bracket_lo, pi_plus);
        est.all_roots = roots;
        return est;
    }

    // No crossing anywhere in the bracket: one-sided bound at the nearer end.
    est.status = boundary.status;
    est.theta_star = boundary.theta_star;
    est.bracket_lo = boundary.bracket_lo;
    est.bracket_hi = boundary.bracket_hi;
    est.probability = posterior_from_theta(boundary.theta_star, pi_plus);
    if (boundary.status == EstimateStatus::clamped_low) {
        // Root below theta_lo: the true posterior exceeds the reported value.
        est.interval_lo = est.probability;
        est.interval_hi = 1.0;
    } else {
        est.interval_lo = 0.0;
        est.interval_hi = est.probability;
    }
    return est;
}

PosteriorEstimate tree_flip_interval(std::span<const double> x, const LabeledDataset& dataset,
                                     const EstimatorConfig& config,
                                     const TrainConfig& train_config) {
    config.validate();
    train_config.validate();
    check_query_dim(x, dataset);
    const double pi_plus = dataset.positive_proportion();
    const WeightedTrainer trainer = make_trainer(ClassifierKind::tree, train_config);

    const auto h = [&](double theta) {
        const ClassWeights w =
            derive_class_weights(theta, dataset.positive_count(), dataset.negative_count());
        return trainer(dataset, w).predict(x);
    };

    PosteriorEstimate est;
    est.pi_plus = pi_plus;

    double a = config.theta_lo;
    double b = config.theta_hi;
    int ha = h(a);
    int hb = h(b);

    if (ha == hb && config.degeneracy_scan_points >= 2) {
        // Same label at both ends; scan for an interior flip before clamping.
        const int m = config.degeneracy_scan_points;
        for (int i = 1; i + 1 < m; ++i) {
            const double t = config.theta_lo +
                             (config.theta_hi - config.theta_lo) * static_cast<double>(i) / (m - 1);
            if (h(t) != ha) {
                b = t;
                hb = -ha;
                break;
            }
        }
    }

    if (ha == hb) {
        // More "+" weight only grows the "+" region, so a constant "+" means
        // the flip sits below the bracket and a constant "-" above it.
        est.bracket_lo = a;
        est.bracket_hi = b;
        est.status = ha > 0 ? EstimateStatus::clamped_low : EstimateStatus::clamped_high;
        est.theta_star = ha > 0 ? a : b;
        est.probability = posterior_from_theta(est.theta_star, pi_plus);
        if (ha > 0) {
            est.interval_lo = est.probability;
            est.interval_hi = 1.0;
        } else {
            est.interval_lo = 0.0;
            est.interval_hi = est.probability;
        }
        return est;
    }

    while (b - a > config.theta_tolerance) {
        const double mid = 0.5 * (a + b);
        if (h(mid) == ha) {
            a = mid;
        } else {
            b = mid;
        }
    }

    est.status = EstimateStatus::converged;
    est.bracket_lo = a;
    est.bracket_hi = b;
    est.theta_star = 0.5 * (a + b);
    est.probability = posterior_from_theta(est.theta_star, pi_plus);
    est.interval_lo = posterior_from_theta(b, pi_plus);
    est.interval_hi = posterior_from_theta(a, pi_plus);
    est.all_roots = {est.theta_star};
    return est;
}

WeightedTrainer make_estimation_trainer(ClassifierKind kind, const TrainConfig& train_config,
                                        const EstimatorConfig& config) {
    if (kind != ClassifierKind::svm || !config.filter_svm_support_vectors) {
        return make_trainer(kind, train_config);
    }
    return [train_config](const LabeledDataset& dataset, const ClassWeights& weights) {
        const TrainedModel full = train_svm(dataset, weights, train_config);
        const LabeledDataset kept = filter_support_vectors(full, dataset);
        return train_svm(kept, weights, train_config);
    };
}

PosteriorEstimate estimate_posterior(std::span<const double> x, ClassifierKind kind,
                                     const LabeledDataset& dataset, const EstimatorConfig& config,
                                     const TrainConfig& train_config) {
    if (kind == ClassifierKind::tree) {
        return tree_flip_interval(x, dataset, config, train_config);
    }
    return estimate_posterior(x, make_estimation_trainer(kind, train_config, config), dataset,
                              config);
}

}  // namespace isoprob
