#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace isoprob {

// Binary-labeled point set in R^d. Labels are +1/-1; every point carries a
// positive base weight (1 unless stated otherwise). Immutable after
// construction, so instances can be shared freely across threads.
class LabeledDataset {
public:
    // coords is row-major, size() == labels.size() * dim. base_weights may be
    // empty (all ones). Throws ConfigError if the invariants do not hold:
    // at least two points, both labels present, all base weights > 0.
    LabeledDataset(std::size_t dim,
                   std::vector<double> coords,
                   std::vector<int> labels,
                   std::vector<double> base_weights = {});

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * dim_, dim_};
    }
    int label(std::size_t i) const { return labels_[i]; }
    double base_weight(std::size_t i) const { return base_weights_[i]; }

    std::size_t positive_count() const noexcept { return n_plus_; }
    std::size_t negative_count() const noexcept { return labels_.size() - n_plus_; }

    // Count-based positive proportion n+ / (n+ + n-).
    double positive_proportion() const noexcept {
        return static_cast<double>(n_plus_) / static_cast<double>(labels_.size());
    }

    const std::vector<double>& coords() const noexcept { return coords_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    const std::vector<double>& base_weights() const noexcept { return base_weights_; }

    // Per-dimension (min, max) over all points.
    std::vector<std::pair<double, double>> bounds() const;

    // Subset by point indices. Indices must be in range; class presence is
    // re-checked (throws ConfigError if a class disappears).
    LabeledDataset subset(const std::vector<std::size_t>& indices) const;

private:
    std::size_t dim_;
    std::vector<double> coords_;
    std::vector<int> labels_;
    std::vector<double> base_weights_;
    std::size_t n_plus_;
};

// Per-class weight multipliers derived from the effective positive proportion
// theta under the fixed-total constraint w+*n+ + w-*n- = n+ + n-.
struct ClassWeights {
    double w_plus;
    double w_minus;
    double theta;

    // Multiplier for a given label.
    double for_label(int label) const { return label > 0 ? w_plus : w_minus; }
};

// w+ = theta*(n+ + n-)/n+, w- = (1-theta)*(n+ + n-)/n-.
// Throws ConfigError unless 0 < theta < 1 and both counts are >= 1.
ClassWeights derive_class_weights(double theta, std::size_t n_plus, std::size_t n_minus);

// Two-Gaussian generator parameters: one class per mean, shared covariance.
struct GaussianSpec {
    std::vector<double> mu_plus{2.0, 0.0};
    std::vector<double> mu_minus{0.0, 0.0};
    std::vector<double> cov{1.0, 0.0, 0.0, 1.0};  // row-major d x d, SPD
    std::size_t n_per_class = 1000;
    double prior_plus = 0.5;  // population prior used by the oracle
    std::uint64_t seed = 0;

    std::size_t dim() const noexcept { return mu_plus.size(); }
};

// Draws n_per_class points per class: x = mu + L*z with L the lower Cholesky
// factor of cov and z standard normals from Box-Muller over mt19937_64(seed).
// Positive points come first, then negative. Deterministic given the spec.
// Throws ConfigError on invalid spec (dimension mismatch, non-SPD cov).
LabeledDataset gen_gaussian(const GaussianSpec& spec);

// CSV persistence. Header `x1,...,xd,label[,weight]`, label tokens exactly
// `+1` / `-1`, shortest round-trip decimal floats, LF or CRLF accepted on
// read. save/load round-trips bit-exactly. Throws ParseError with the
// offending line number on malformed input.
LabeledDataset load_dataset(const std::string& path);
void save_dataset(const LabeledDataset& dataset, const std::string& path);

// GaussianSpec JSON file. All fields optional; absent fields keep the
// defaults above. Throws ParseError / ConfigError.
GaussianSpec load_gaussian_spec(const std::string& path);
void save_gaussian_spec(const GaussianSpec& spec, const std::string& path);

}  // namespace isoprob
