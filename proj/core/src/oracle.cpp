#include <cmath>
#include <string>
#include <vector>

#include "detail/linalg.hpp"
#include "isoprob/errors.hpp"
#include "isoprob/oracle.hpp"

namespace isoprob {

namespace {

// sigmoid(t) without overflow for large |t|
double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

}  // namespace

GaussianOracle::GaussianOracle(const GaussianSpec& spec) : spec_(spec) {
    const std::size_t d = spec.dim();
    if (d == 0) throw ConfigError("oracle needs at least one dimension");
    if (spec.mu_minus.size() != d) {
        throw ConfigError("mu_plus and mu_minus must have the same dimension");
    }
    if (spec.cov.size() != d * d) {
        throw ConfigError("cov must be a row-major " + std::to_string(d) + "x" +
                          std::to_string(d) + " matrix");
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            if (std::abs(spec.cov[i * d + j] - spec.cov[j * d + i]) > 1e-12) {
                throw ConfigError("cov must be symmetric");
            }
        }
    }
    if (!(spec.prior_plus > 0.0 && spec.prior_plus < 1.0)) {
        throw ConfigError("prior_plus must lie in the open unit interval");
    }

    const auto l = detail::cholesky(spec.cov, d);
    if (!l) throw ConfigError("cov must be positive definite");

    a_.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) a_[i] = spec.mu_plus[i] - spec.mu_minus[i];
    detail::cholesky_solve(*l, d, a_);

    std::vector<double> sp = spec.mu_plus;
    detail::cholesky_solve(*l, d, sp);
    std::vector<double> sm = spec.mu_minus;
    detail::cholesky_solve(*l, d, sm);
    const double quad_plus = detail::dot(spec.mu_plus, sp);
    const double quad_minus = detail::dot(spec.mu_minus, sm);
    c_ = -0.5 * (quad_plus - quad_minus) +
         std::log(spec.prior_plus / (1.0 - spec.prior_plus));
}

double GaussianOracle::log_odds(std::span<const double> x) const {
    if (x.size() != a_.size()) {
        throw ConfigError("oracle query has dimension " + std::to_string(x.size()) +
                          ", expected " + std::to_string(a_.size()));
    }
    return detail::dot(a_, x) + c_;
}

double GaussianOracle::true_posterior(std::span<const double> x) const {
    return sigmoid(log_odds(x));
}

double GaussianOracle::density_ratio(std::span<const double> x) const {
    const double prior_log_odds = std::log(spec_.prior_plus / (1.0 - spec_.prior_plus));
    return std::exp(log_odds(x) - prior_log_odds);
}

}  // namespace isoprob
