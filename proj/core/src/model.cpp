#include <cmath>
#include <fstream>

#include <json.hpp>

#include "detail/linalg.hpp"
#include "isoprob/classifiers.hpp"

namespace isoprob {

const char* to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::svm: return "svm";
        case ClassifierKind::logreg: return "logreg";
        case ClassifierKind::tree: return "tree";
    }
    return "?";
}

ClassifierKind classifier_kind_from_string(const std::string& name) {
    if (name == "svm") return ClassifierKind::svm;
    if (name == "logreg") return ClassifierKind::logreg;
    if (name == "tree") return ClassifierKind::tree;
    throw ConfigError("unknown classifier '" + name + "' (expected svm, logreg, or tree)");
}

void TrainConfig::validate() const {
    if (!(svm_c > 0.0)) throw ConfigError("svm_c must be > 0");
    if (svm_max_sweeps < 1) throw ConfigError("svm_max_sweeps must be >= 1");
    if (!(svm_gap_tolerance > 0.0)) throw ConfigError("svm_gap_tolerance must be > 0");
    if (logreg_max_iter < 1) throw ConfigError("logreg_max_iter must be >= 1");
    if (!(logreg_tolerance > 0.0)) throw ConfigError("logreg_tolerance must be > 0");
    if (!(tree_min_leaf_weight > 0.0)) throw ConfigError("tree_min_leaf_weight must be > 0");
    if (tree_cc_alpha && !(*tree_cc_alpha >= 0.0)) {
        throw ConfigError("tree_cc_alpha must be >= 0 when set");
    }
}

TrainedModel::TrainedModel(ClassifierKind kind, LinearParams params, TrainDiagnostics diag)
    : kind_(kind), params_(std::move(params)), diag_(diag) {
    if (kind_ == ClassifierKind::tree) throw ConfigError("linear params with tree kind");
    const auto& lp = std::get<LinearParams>(params_);
    if (lp.w.empty()) throw ConfigError("weight vector must not be empty");
    for (double v : lp.w) {
        if (!std::isfinite(v)) throw ConfigError("weight vector must be finite");
    }
    if (!std::isfinite(lp.b)) throw ConfigError("intercept must be finite");
}

TrainedModel::TrainedModel(TreeParams params, TrainDiagnostics diag)
    : kind_(ClassifierKind::tree), params_(std::move(params)), diag_(diag) {
    const auto& tp = std::get<TreeParams>(params_);
    if (tp.nodes.empty()) throw ConfigError("tree must have at least one node");
    for (const auto& node : tp.nodes) {
        if (node.is_leaf() && !(node.mass_plus + node.mass_minus > 0.0)) {
            throw ConfigError("every leaf must carry positive weighted mass");
        }
    }
}

const LinearParams& TrainedModel::linear() const {
    if (kind_ == ClassifierKind::tree) throw ConfigError("model has no linear params");
    return std::get<LinearParams>(params_);
}

const TreeParams& TrainedModel::tree() const {
    if (kind_ != ClassifierKind::tree) throw ConfigError("model has no tree params");
    return std::get<TreeParams>(params_);
}

std::size_t TrainedModel::dim() const {
    if (kind_ != ClassifierKind::tree) return std::get<LinearParams>(params_).w.size();
    // Trees only record the features they split on.
    std::size_t d = 0;
    for (const auto& node : std::get<TreeParams>(params_).nodes) {
        if (!node.is_leaf()) d = std::max(d, static_cast<std::size_t>(node.feature) + 1);
    }
    return d;
}

double TrainedModel::score(std::span<const double> x) const {
    if (kind_ != ClassifierKind::tree) {
        const auto& lp = std::get<LinearParams>(params_);
        if (x.size() != lp.w.size()) throw ConfigError("point dimension does not match model");
        return detail::dot(lp.w, x) + lp.b;
    }
    const auto& tp = std::get<TreeParams>(params_);
    int idx = 0;
    for (;;) {
        const TreeNode& node = tp.nodes[idx];
        if (node.is_leaf()) {
            const double total = node.mass_plus + node.mass_minus;
            return (node.mass_plus - node.mass_minus) / total;
        }
        if (static_cast<std::size_t>(node.feature) >= x.size()) {
            throw ConfigError("point dimension does not match tree splits");
        }
        idx = x[node.feature] <= node.threshold ? node.left : node.right;
    }
}

int TrainedModel::predict(std::span<const double> x) const {
    return score(x) >= 0.0 ? 1 : -1;
}

SvmConvergenceError::SvmConvergenceError(TrainedModel model, double gap, double primal)
    : EstimationError("svm did not reach the gap tolerance within the sweep budget (gap " +
                      std::to_string(gap) + ", primal " + std::to_string(primal) + ")"),
      model_(std::move(model)),
      gap_(gap) {}

TrainedModel train(ClassifierKind kind, const LabeledDataset& dataset, const ClassWeights& weights,
                   const TrainConfig& config) {
    switch (kind) {
        case ClassifierKind::svm: return train_svm(dataset, weights, config);
        case ClassifierKind::logreg: return train_logreg(dataset, weights, config);
        case ClassifierKind::tree: return train_tree(dataset, weights, config);
    }
    throw ConfigError("unknown classifier kind");
}

WeightedTrainer make_trainer(ClassifierKind kind, const TrainConfig& config) {
    return [kind, config](const LabeledDataset& dataset, const ClassWeights& weights) {
        return train(kind, dataset, weights, config);
    };
}

std::string model_to_json(const TrainedModel& model) {
    nlohmann::json doc;
    doc["kind"] = to_string(model.kind());
    if (model.kind() != ClassifierKind::tree) {
        doc["w"] = model.linear().w;
        doc["b"] = model.linear().b;
    } else {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& node : model.tree().nodes) {
            nodes.push_back({{"feature", node.feature},
                             {"threshold", node.threshold},
                             {"left", node.left},
                             {"right", node.right},
                             {"mass_plus", node.mass_plus},
                             {"mass_minus", node.mass_minus}});
        }
        doc["nodes"] = nodes;
    }
    const auto& diag = model.diagnostics();
    doc["diagnostics"] = {{"iterations", diag.iterations},
                          {"duality_gap", diag.duality_gap},
                          {"grad_inf_norm", diag.grad_inf_norm},
                          {"separable", diag.separable},
                          {"cc_alpha", diag.cc_alpha}};
    return doc.dump(2);
}

TrainedModel model_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid model JSON: ") + e.what());
    }
    try {
        TrainDiagnostics diag;
        if (doc.contains("diagnostics")) {
            const auto& d = doc["diagnostics"];
            diag.iterations = d.value("iterations", 0);
            diag.duality_gap = d.value("duality_gap", 0.0);
            diag.grad_inf_norm = d.value("grad_inf_norm", 0.0);
            diag.separable = d.value("separable", false);
            diag.cc_alpha = d.value("cc_alpha", 0.0);
        }
        const auto kind = classifier_kind_from_string(doc.at("kind").get<std::string>());
        if (kind != ClassifierKind::tree) {
            LinearParams lp;
            lp.w = doc.at("w").get<std::vector<double>>();
            lp.b = doc.at("b").get<double>();
            return TrainedModel(kind, std::move(lp), diag);
        }
        TreeParams tp;
        for (const auto& n : doc.at("nodes")) {
            TreeNode node;
            node.feature = n.at("feature").get<int>();
            node.threshold = n.at("threshold").get<double>();
            node.left = n.at("left").get<int>();
            node.right = n.at("right").get<int>();
            node.mass_plus = n.at("mass_plus").get<double>();
            node.mass_minus = n.at("mass_minus").get<double>();
            tp.nodes.push_back(node);
        }
        return TrainedModel(std::move(tp), diag);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid model JSON: ") + e.what());
    }
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << model_to_json(model) << "\n";
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

}  // namespace isoprob
