#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "detail/linalg.hpp"
#include "isoprob/classifiers.hpp"

namespace isoprob {

// Coordinate descent on the L1-loss SVM dual
//
//   min_a  0.5 a' Q a - e' a,   0 <= a_i <= C_i,
//
// where Q_ij = y_i y_j xt_i . xt_j over bias-augmented points xt = (x, 1)
// and C_i = svm_c * class multiplier * base weight. The primal it certifies:
//
//   min_{w,b}  0.5 (|w|^2 + b^2) + sum_i C_i max(0, 1 - y_i (w.x_i + b)).
//
// Augmenting the bias keeps the dual box-constrained (no equality
// constraint), the liblinear formulation. Sweeps run in fixed point order so
// retraining is bit-reproducible; the stopping rule is the measured
// primal-dual gap, checked once per sweep on a freshly accumulated w.
TrainedModel train_svm(const LabeledDataset& dataset, const ClassWeights& weights,
                       const TrainConfig& config) {
    config.validate();
    const std::size_t n = dataset.size();
    const std::size_t d = dataset.dim();
    const std::size_t da = d + 1;

    std::vector<double> upper(n);
    std::vector<double> qdiag(n);
    for (std::size_t i = 0; i < n; ++i) {
        upper[i] = config.svm_c * weights.for_label(dataset.label(i)) * dataset.base_weight(i);
        auto x = dataset.point(i);
        qdiag[i] = detail::dot(x, x) + 1.0;
    }

    std::vector<double> alpha(n, 0.0);
    std::vector<double> w(da, 0.0);

    auto rebuild_w = [&] {
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (alpha[i] == 0.0) continue;
            const double coef = alpha[i] * dataset.label(i);
            auto x = dataset.point(i);
            for (std::size_t k = 0; k < d; ++k) w[k] += coef * x[k];
            w[d] += coef;
        }
    };

    auto margin = [&](std::size_t i) {
        auto x = dataset.point(i);
        double s = w[d];
        for (std::size_t k = 0; k < d; ++k) s += w[k] * x[k];
        return dataset.label(i) * s;
    };

    auto objectives = [&](double& primal, double& dual) {
        double wnorm2 = detail::dot(w, w);
        double hinge = 0.0;
        double asum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            hinge += upper[i] * std::max(0.0, 1.0 - margin(i));
            asum += alpha[i];
        }
        primal = 0.5 * wnorm2 + hinge;
        dual = asum - 0.5 * wnorm2;
    };

    double best_gap = std::numeric_limits<double>::infinity();
    std::vector<double> best_w = w;
    double primal = 0.0, dual = 0.0;
    int sweep = 0;

    for (; sweep < config.svm_max_sweeps; ++sweep) {
        for (std::size_t i = 0; i < n; ++i) {
            const double g = margin(i) - 1.0;
            const double a = alpha[i];
            if ((a == 0.0 && g >= 0.0) || (a == upper[i] && g <= 0.0)) continue;
            const double a_new = std::clamp(a - g / qdiag[i], 0.0, upper[i]);
            const double delta = (a_new - a) * dataset.label(i);
            if (delta == 0.0) continue;
            alpha[i] = a_new;
            auto x = dataset.point(i);
            for (std::size_t k = 0; k < d; ++k) w[k] += delta * x[k];
            w[d] += delta;
        }

        rebuild_w();
        objectives(primal, dual);
        const double gap = primal - dual;
        if (gap < best_gap) {
            best_gap = gap;
            best_w = w;
        }
        if (gap <= config.svm_gap_tolerance * primal) {
            TrainDiagnostics diag;
            diag.iterations = sweep + 1;
            diag.duality_gap = gap;
            LinearParams lp;
            lp.w.assign(w.begin(), w.begin() + d);
            lp.b = w[d];
            return TrainedModel(ClassifierKind::svm, std::move(lp), diag);
        }
    }

    TrainDiagnostics diag;
    diag.iterations = sweep;
    diag.duality_gap = best_gap;
    LinearParams lp;
    lp.w.assign(best_w.begin(), best_w.begin() + d);
    lp.b = best_w[d];
    throw SvmConvergenceError(TrainedModel(ClassifierKind::svm, std::move(lp), diag), best_gap,
                              primal);
}

LabeledDataset filter_support_vectors(const TrainedModel& model, const LabeledDataset& dataset) {
    if (model.kind() != ClassifierKind::svm) {
        throw ConfigError("support-vector filtering requires an svm model");
    }
    // The solver stops at a positive duality gap, so computed margins carry an
    // error of up to ||(x, 1)|| * sqrt(2 * gap) (the primal is 1-strongly convex
    // in (w, b)).  Widen the keep threshold by that bound so a true margin point
    // is never discarded because of solver inaccuracy; clearly interior points
    // still fall outside the widened band.
    const double gap = std::max(model.diagnostics().duality_gap, 0.0);
    const double param_error = std::sqrt(2.0 * gap);
    std::vector<std::size_t> keep;
    std::size_t kept_plus = 0, kept_minus = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto x = dataset.point(i);
        double sq = 1.0;  // augmented bias coordinate
        for (const double v : x) sq += v * v;
        const double slack = 1e-8 + std::sqrt(sq) * param_error;
        const double m = dataset.label(i) * model.score(x);
        if (m <= 1.0 + slack) {
            keep.push_back(i);
            (dataset.label(i) > 0 ? kept_plus : kept_minus) += 1;
        }
    }
    if (kept_plus == 0 || kept_minus == 0) {
        throw EstimationError("support-vector filtering would leave a class empty");
    }
    return dataset.subset(keep);
}

}  // namespace isoprob
