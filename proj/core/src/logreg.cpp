#include <algorithm>
#include <cmath>
#include <vector>

#include "detail/linalg.hpp"
#include "isoprob/classifiers.hpp"

namespace isoprob {

namespace {

// log(1 + exp(-t)) without overflow for large |t|.
double log1p_exp_neg(double t) {
    if (t >= 0.0) return std::log1p(std::exp(-t));
    return -t + std::log1p(std::exp(t));
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

}  // namespace

// Weighted logistic negative log-likelihood
//
//   L(w, b) = sum_i c_i log(1 + exp(-y_i (w.x_i + b))),  c_i = class mult * base weight,
//
// minimized by Newton steps damped with a halving line search, falling back
// to a gradient step whenever the Hessian fails to factor. Starts at zero.
// On a separable dataset the optimum sits at infinity; the loop then runs
// out its budget and returns the last finite iterate flagged separable.
TrainedModel train_logreg(const LabeledDataset& dataset, const ClassWeights& weights,
                          const TrainConfig& config) {
    config.validate();
    const std::size_t n = dataset.size();
    const std::size_t d = dataset.dim();
    const std::size_t da = d + 1;  // trailing slot is the intercept

    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        c[i] = weights.for_label(dataset.label(i)) * dataset.base_weight(i);
    }

    std::vector<double> w(da, 0.0);
    std::vector<double> z(n, 0.0);  // w.x_i + b

    auto refresh_z = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            auto x = dataset.point(i);
            double s = w[d];
            for (std::size_t k = 0; k < d; ++k) s += w[k] * x[k];
            z[i] = s;
        }
    };

    auto loss = [&] {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) f += c[i] * log1p_exp_neg(dataset.label(i) * z[i]);
        return f;
    };

    std::vector<double> grad(da);
    auto compute_grad = [&] {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double y = dataset.label(i);
            const double coef = -c[i] * y * sigmoid(-y * z[i]);
            auto x = dataset.point(i);
            for (std::size_t k = 0; k < d; ++k) grad[k] += coef * x[k];
            grad[d] += coef;
        }
    };

    auto grad_inf_norm = [&] {
        double g = 0.0;
        for (double v : grad) g = std::max(g, std::abs(v));
        return g;
    };

    refresh_z();
    compute_grad();
    double f = loss();
    int iter = 0;
    std::vector<double> hess(da * da);
    std::vector<double> step(da);
    std::vector<double> w_trial(da);

    for (; iter < config.logreg_max_iter; ++iter) {
        if (grad_inf_norm() <= config.logreg_tolerance) break;

        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(z[i]);
            const double r = c[i] * p * (1.0 - p);
            if (r == 0.0) continue;
            auto x = dataset.point(i);
            for (std::size_t a = 0; a < da; ++a) {
                const double xa = a < d ? x[a] : 1.0;
                for (std::size_t b = a; b < da; ++b) {
                    const double xb = b < d ? x[b] : 1.0;
                    hess[a * da + b] += r * xa * xb;
                }
            }
        }
        for (std::size_t a = 0; a < da; ++a) {
            for (std::size_t b = 0; b < a; ++b) hess[a * da + b] = hess[b * da + a];
        }

        auto chol = detail::cholesky(hess, da);
        if (chol) {
            step = grad;
            detail::cholesky_solve(*chol, da, step);
        } else {
            step = grad;  // plain gradient direction when the Hessian is rank-deficient
        }

        // Halving line search on the objective.
        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half < 50; ++half) {
            for (std::size_t k = 0; k < da; ++k) w_trial[k] = w[k] - t * step[k];
            std::swap(w, w_trial);
            refresh_z();
            const double f_trial = loss();
            if (f_trial < f || (f_trial == f && t < 1.0)) {
                f = f_trial;
                accepted = true;
                break;
            }
            std::swap(w, w_trial);
            t *= 0.5;
        }
        if (!accepted) {
            refresh_z();  // w was restored; z must match it again
            break;        // no descent direction left at fp resolution
        }
        compute_grad();
    }

    compute_grad();
    TrainDiagnostics diag;
    diag.iterations = iter;
    diag.grad_inf_norm = grad_inf_norm();
    if (diag.grad_inf_norm > config.logreg_tolerance) {
        bool all_positive = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (dataset.label(i) * z[i] <= 0.0) {
                all_positive = false;
                break;
            }
        }
        diag.separable = all_positive;
    }

    LinearParams lp;
    lp.w.assign(w.begin(), w.begin() + d);
    lp.b = w[d];
    return TrainedModel(ClassifierKind::logreg, std::move(lp), diag);
}

}  // namespace isoprob
