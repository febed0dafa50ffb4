#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "isoprob/dataset.hpp"
#include "isoprob/errors.hpp"

namespace isoprob {

enum class ClassifierKind { svm, logreg, tree };

const char* to_string(ClassifierKind kind);
ClassifierKind classifier_kind_from_string(const std::string& name);

struct TrainConfig {
    // Soft-margin SVM. Per-point cost is svm_c * class multiplier * base weight.
    double svm_c = 1.0;
    int svm_max_sweeps = 20000;
    double svm_gap_tolerance = 1e-6;  // relative duality gap at return

    // Logistic regression (damped Newton).
    int logreg_max_iter = 200;
    double logreg_tolerance = 1e-8;  // gradient infinity norm at return

    // Decision tree.
    double tree_min_leaf_weight = 1.0;
    // Cost-complexity pruning strength; unset selects it by 5-fold weighted
    // cross-validation, 0 keeps the fully grown tree.
    std::optional<double> tree_cc_alpha{};

    void validate() const;  // throws ConfigError
};

struct LinearParams {
    std::vector<double> w;
    double b = 0.0;
};

// Axis-aligned split node. feature < 0 marks a leaf; children are indices
// into the owning node vector. Masses are weighted class totals of the
// training points routed to the node.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double mass_plus = 0.0;
    double mass_minus = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
};

struct TreeParams {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct TrainDiagnostics {
    int iterations = 0;
    double duality_gap = 0.0;    // svm: absolute primal-dual gap at return
    double grad_inf_norm = 0.0;  // logreg
    bool separable = false;      // logreg hit the iteration budget with all margins positive
    double cc_alpha = 0.0;       // tree: pruning strength actually applied
};

// Immutable trained classifier. score()/predict() are pure and thread-safe.
class TrainedModel {
public:
    TrainedModel(ClassifierKind kind, LinearParams params, TrainDiagnostics diag = {});
    TrainedModel(TreeParams params, TrainDiagnostics diag = {});

    ClassifierKind kind() const noexcept { return kind_; }
    const TrainDiagnostics& diagnostics() const noexcept { return diag_; }

    // svm/logreg: w.x + b. tree: (mass+ - mass-)/(mass+ + mass-) at x's leaf.
    // Throws ConfigError on dimension mismatch.
    double score(std::span<const double> x) const;
    // Sign of score with +1 on ties.
    int predict(std::span<const double> x) const;

    std::size_t dim() const;

    const LinearParams& linear() const;  // throws ConfigError if kind is tree
    const TreeParams& tree() const;      // throws ConfigError if kind is not tree

private:
    ClassifierKind kind_;
    std::variant<LinearParams, TreeParams> params_;
    TrainDiagnostics diag_;
};

// Thrown when the SVM solver exhausts its sweep budget before reaching the
// gap tolerance. Carries the best iterate so callers can still inspect it.
class SvmConvergenceError : public EstimationError {
public:
    SvmConvergenceError(TrainedModel model, double gap, double primal);

    const TrainedModel& best_model() const noexcept { return model_; }
    double gap() const noexcept { return gap_; }

private:
    TrainedModel model_;
    double gap_;
};

// L1-loss soft-margin SVM via dual coordinate descent on the box-constrained
// dual (deterministic sweep order, bias as an augmented unit feature).
// Returns once the relative duality gap is within config.svm_gap_tolerance.
TrainedModel train_svm(const LabeledDataset& dataset, const ClassWeights& weights,
                       const TrainConfig& config = {});

// Subset with y_i * score(x_i) <= 1 + slack_i (margin or violating points),
// where slack_i = 1e-8 + ||(x_i, 1)|| * sqrt(2 * duality_gap) accounts for the
// solver stopping at a positive gap. Throws EstimationError if a class would
// become empty.
LabeledDataset filter_support_vectors(const TrainedModel& model, const LabeledDataset& dataset);

// Weighted negative log-likelihood minimized by damped Newton with a
// gradient-step fallback; zero initialization. A separable dataset returns
// the finite budget-capped iterate with diagnostics().separable set.
TrainedModel train_logreg(const LabeledDataset& dataset, const ClassWeights& weights,
                          const TrainConfig& config = {});

// Greedy weighted-Gini tree with cost-complexity pruning. Ties in split
// choice go to the lowest feature index, then the lowest threshold.
TrainedModel train_tree(const LabeledDataset& dataset, const ClassWeights& weights,
                        const TrainConfig& config = {});

// Kind-dispatched training.
TrainedModel train(ClassifierKind kind, const LabeledDataset& dataset,
                   const ClassWeights& weights, const TrainConfig& config = {});

// A reusable (dataset, weights) -> model procedure, the handle the posterior
// estimator drives. Must be pure: same inputs, same model.
using WeightedTrainer =
    std::function<TrainedModel(const LabeledDataset&, const ClassWeights&)>;

WeightedTrainer make_trainer(ClassifierKind kind, const TrainConfig& config = {});

// JSON document round-trip (kind tag + params).
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace isoprob
