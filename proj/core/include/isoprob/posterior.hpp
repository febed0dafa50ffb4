#pragma once

#include <span>
#include <vector>

#include "isoprob/classifiers.hpp"
#include "isoprob/dataset.hpp"

namespace isoprob {

// converged    the theta bracket collapsed onto a boundary crossing
// clamped_low  no crossing in the bracket; the root lies at or below theta_lo
// clamped_high no crossing in the bracket; the root lies at or above theta_hi
// degenerate   multiple crossings: one point, several posterior candidates
enum class EstimateStatus { converged, clamped_low, clamped_high, degenerate };

const char* to_string(EstimateStatus status);

struct EstimatorConfig {
    double theta_lo = 0.01;
    double theta_hi = 0.99;
    double theta_tolerance = 1e-4;
    double score_tolerance = 1e-8;
    // Uniform theta grid size for the multiple-root scan; < 2 disables it.
    int degeneracy_scan_points = 99;
    // For svm, reduce each reweighted training to its own support vectors and
    // retrain on them (with unchanged per-point multipliers the dropped points
    // carry zero dual weight, so the boundary is preserved). A fixed subset
    // chosen at one weighting would not stay valid at another: reweighting the
    // margin band alone collapses to a constant classifier under small tilts.
    bool filter_svm_support_vectors = true;

    void validate() const;  // throws ConfigError
};

struct PosteriorEstimate {
    double probability = 0.5;      // primary value (clamped: the one-sided bound)
    double interval_lo = 0.0;      // probability interval; tight for converged
    double interval_hi = 1.0;      // score-based estimates, wide for trees/clamps
    double theta_star = 0.5;
    double bracket_lo = 0.0;       // final theta bracket, bracket_lo <= theta_star <= bracket_hi
    double bracket_hi = 1.0;
    EstimateStatus status = EstimateStatus::converged;
    std::vector<double> all_roots; // increasing theta roots; >= 2 iff degenerate
    double pi_plus = 0.5;          // positive proportion used for the conversion
};

// Posterior odds of the Bayes-ratio identity: with the boundary through x at
// effective proportion theta_star, the class-density ratio at x equals
// (1-theta_star)/theta_star, so
//   R = ((1-theta_star) * pi_plus) / (theta_star * (1-pi_plus))
// and the posterior is R/(1+R). Strictly decreasing in theta_star, 0.5 at
// theta_star == pi_plus. Throws ConfigError outside the open unit interval.
double posterior_from_theta(double theta_star, double pi_plus);

struct BoundaryResult {
    double theta_star;
    double bracket_lo;
    double bracket_hi;
    EstimateStatus status;
};

// Bisection on g(theta) = score of the theta-reweighted model at x. If g has
// no sign change over [theta_lo, theta_hi], returns the endpoint with the
// smaller |g| and a clamped status.
BoundaryResult find_boundary_theta(std::span<const double> x, const WeightedTrainer& trainer,
                                   const LabeledDataset& dataset,
                                   const EstimatorConfig& config = {});

// All boundary-crossing thetas: g is sampled on the scan grid and every
// sign-change cell is refined by bisection. Empty means the boundary never
// reaches x within the bracket.
std::vector<double> detect_degeneracy(std::span<const double> x, const WeightedTrainer& trainer,
                                      const LabeledDataset& dataset,
                                      const EstimatorConfig& config = {});

// Full score-based pipeline: boundary search, degeneracy scan, conversion via
// posterior_from_theta with pi_plus taken from the dataset. Under degeneracy
// the primary value is the root nearest pi_plus; all roots are retained.
PosteriorEstimate estimate_posterior(std::span<const double> x, const WeightedTrainer& trainer,
                                     const LabeledDataset& dataset,
                                     const EstimatorConfig& config = {});

// Label-flip bracketing for classifiers without usable scores: bisection on
// h(theta) = predicted label at x. Returns the flip interval mapped to a
// probability interval; a constant label over the bracket yields a one-sided
// clamped bound.
PosteriorEstimate tree_flip_interval(std::span<const double> x, const LabeledDataset& dataset,
                                     const EstimatorConfig& config = {},
                                     const TrainConfig& train_config = {});

// Kind-dispatched entry point used by the CLI: runs the score-based pipeline
// (svm, logreg) or label-flip bracketing (tree) with the estimation trainer
// below.
PosteriorEstimate estimate_posterior(std::span<const double> x, ClassifierKind kind,
                                     const LabeledDataset& dataset,
                                     const EstimatorConfig& config = {},
                                     const TrainConfig& train_config = {});

// The trainer the estimation pipeline retrains with at each theta. For svm
// with filtering enabled this trains, reduces the dataset to the model's own
// support vectors, and retrains on that subset with the same multipliers;
// other kinds (and filtering off) train directly.
WeightedTrainer make_estimation_trainer(ClassifierKind kind, const TrainConfig& train_config = {},
                                        const EstimatorConfig& config = {});

}  // namespace isoprob
