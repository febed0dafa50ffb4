#pragma once

#include <span>
#include <vector>

#include "isoprob/dataset.hpp"

namespace isoprob {

// Closed-form Bayes posterior for two Gaussians with shared covariance:
// P(+|x) = sigmoid(a.x + c) with a = cov^-1 (mu+ - mu-) and
// c = -(mu+' cov^-1 mu+ - mu-' cov^-1 mu-)/2 + ln(prior+/prior-).
// Ground truth for validating the estimator on generated data.
class GaussianOracle {
public:
    // Throws ConfigError on dimension mismatch or non-SPD covariance.
    explicit GaussianOracle(const GaussianSpec& spec);

    double log_odds(std::span<const double> x) const;
    double true_posterior(std::span<const double> x) const;

    // f(x|+)/f(x|-) in closed form.
    double density_ratio(std::span<const double> x) const;

    std::size_t dim() const noexcept { return a_.size(); }
    const GaussianSpec& spec() const noexcept { return spec_; }

private:
    GaussianSpec spec_;
    std::vector<double> a_;
    double c_;
};

}  // namespace isoprob
