#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "isoprob/classifiers.hpp"

namespace isoprob {

namespace {

struct BuildContext {
    const LabeledDataset* data;
    std::vector<double> point_weight;  // class multiplier * base weight
    double min_leaf_weight;
    double total_mass;
};

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double child_cost = 0.0;  // sum of both children's Gini costs
};

// Gini cost in mass units: M * (1 - p+^2 - p-^2) == M - (m+^2 + m-^2)/M.
double gini_cost(double m_plus, double m_minus) {
    const double m = m_plus + m_minus;
    if (m <= 0.0) return 0.0;
    return m - (m_plus * m_plus + m_minus * m_minus) / m;
}

// Best axis-aligned split of the given points: lowest summed child Gini,
// ties resolved toward the lowest feature index, then the lowest threshold.
// Only boundaries leaving at least min_leaf_weight of mass per side count.
SplitChoice find_best_split(const BuildContext& ctx, const std::vector<std::size_t>& indices,
                            double node_cost) {
    const auto& data = *ctx.data;
    const std::size_t d = data.dim();
    SplitChoice best;

    std::vector<std::size_t> order(indices);
    for (std::size_t feature = 0; feature < d; ++feature) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return data.point(a)[feature] < data.point(b)[feature];
        });

        double left_plus = 0.0, left_minus = 0.0;
        double right_plus = 0.0, right_minus = 0.0;
        for (std::size_t i : order) {
            (data.label(i) > 0 ? right_plus : right_minus) += ctx.point_weight[i];
        }

        for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
            const std::size_t i = order[pos];
            const double wi = ctx.point_weight[i];
            (data.label(i) > 0 ? left_plus : left_minus) += wi;
            (data.label(i) > 0 ? right_plus : right_minus) -= wi;

            const double v = data.point(i)[feature];
            const double v_next = data.point(order[pos + 1])[feature];
            if (!(v < v_next)) continue;  // no boundary between equal values

            if (left_plus + left_minus < ctx.min_leaf_weight) continue;
            if (right_plus + right_minus < ctx.min_leaf_weight) continue;

            const double cost = gini_cost(left_plus, left_minus) + gini_cost(right_plus, right_minus);
            if (cost >= node_cost - 1e-12 * std::max(1.0, node_cost)) continue;  // no real gain
            if (!best.found || cost < best.child_cost - 1e-12 * std::max(1.0, best.child_cost)) {
                double threshold = 0.5 * (v + v_next);
                if (!(v < threshold && threshold < v_next)) threshold = v;  // adjacent floats
                best.found = true;
                best.feature = static_cast<int>(feature);
                best.threshold = threshold;
                best.child_cost = cost;
            }
        }
    }
    return best;
}

int build_node(BuildContext& ctx, std::vector<TreeNode>& nodes, std::vector<std::size_t> indices) {
    const auto& data = *ctx.data;
    double m_plus = 0.0, m_minus = 0.0;
    for (std::size_t i : indices) {
        (data.label(i) > 0 ? m_plus : m_minus) += ctx.point_weight[i];
    }

    const int self = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{});
    nodes[self].mass_plus = m_plus;
    nodes[self].mass_minus = m_minus;

    const bool pure = m_plus == 0.0 || m_minus == 0.0;
    const bool splittable = m_plus + m_minus >= 2.0 * ctx.min_leaf_weight && indices.size() >= 2;
    if (pure || !splittable) return self;

    const SplitChoice split = find_best_split(ctx, indices, gini_cost(m_plus, m_minus));
    if (!split.found) return self;

    std::vector<std::size_t> left_idx, right_idx;
    left_idx.reserve(indices.size());
    right_idx.reserve(indices.size());
    for (std::size_t i : indices) {
        (data.point(i)[split.feature] <= split.threshold ? left_idx : right_idx).push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();

    const int left = build_node(ctx, nodes, std::move(left_idx));
    const int right = build_node(ctx, nodes, std::move(right_idx));
    nodes[self].feature = split.feature;
    nodes[self].threshold = split.threshold;
    nodes[self].left = left;
    nodes[self].right = right;
    return self;
}

// Weighted misclassified mass of node t as a fraction of the whole dataset.
double node_risk(const TreeNode& t, double total_mass) {
    return std::min(t.mass_plus, t.mass_minus) / total_mass;
}

struct PruneStats {
    double risk;
    int leaves;
};

// Minimal cost-complexity subtree for a fixed alpha, bottom-up: a branch
// whose collapsed cost R(t) + alpha does not exceed its subtree cost
// R(T_t) + alpha*|T_t| becomes a leaf. Ties collapse.
PruneStats prune_at(std::vector<TreeNode>& nodes, int idx, double alpha, double total_mass) {
    TreeNode& t = nodes[idx];
    if (t.is_leaf()) return {node_risk(t, total_mass), 1};

    const PruneStats l = prune_at(nodes, t.left, alpha, total_mass);
    const PruneStats r = prune_at(nodes, t.right, alpha, total_mass);
    const double subtree_risk = l.risk + r.risk;
    const int leaves = l.leaves + r.leaves;

    if (node_risk(t, total_mass) + alpha <= subtree_risk + alpha * leaves) {
        t.feature = -1;
        t.left = t.right = -1;
        return {node_risk(t, total_mass), 1};
    }
    return {subtree_risk, leaves};
}

struct LinkStats {
    double risk;
    int leaves;
};

LinkStats subtree_stats(const std::vector<TreeNode>& nodes, int idx, double total_mass) {
    const TreeNode& t = nodes[idx];
    if (t.is_leaf()) return {node_risk(t, total_mass), 1};
    const LinkStats l = subtree_stats(nodes, t.left, total_mass);
    const LinkStats r = subtree_stats(nodes, t.right, total_mass);
    return {l.risk + r.risk, l.leaves + r.leaves};
}

// Weakest-link alpha sequence of a tree: the critical alphas at which the
// cost-complexity optimum loses a branch, in nondecreasing order.
std::vector<double> weakest_link_alphas(std::vector<TreeNode> nodes, double total_mass) {
    std::vector<double> alphas;
    std::vector<double> link(nodes.size());
    std::vector<char> reachable(nodes.size());
    while (!nodes[0].is_leaf()) {
        // collapsing orphans a branch's descendants in the flat vector, so
        // restrict each round to nodes still reachable from the root
        std::fill(reachable.begin(), reachable.end(), 0);
        std::vector<int> stack{0};
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            reachable[i] = 1;
            if (!nodes[i].is_leaf()) {
                stack.push_back(nodes[i].left);
                stack.push_back(nodes[i].right);
            }
        }

        double min_g = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!reachable[i] || nodes[i].is_leaf()) continue;
            const LinkStats s = subtree_stats(nodes, static_cast<int>(i), total_mass);
            link[i] = (node_risk(nodes[i], total_mass) - s.risk) / (s.leaves - 1);
            min_g = std::min(min_g, link[i]);
        }
        if (!std::isfinite(min_g)) break;
        alphas.push_back(std::max(min_g, alphas.empty() ? 0.0 : alphas.back()));
        // collapse every node achieving the minimum, simultaneously
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!reachable[i] || nodes[i].is_leaf()) continue;
            if (link[i] <= min_g + 1e-15) {
                nodes[i].feature = -1;
                nodes[i].left = nodes[i].right = -1;
            }
        }
    }
    return alphas;
}

int tree_predict(const std::vector<TreeNode>& nodes, std::span<const double> x) {
    int idx = 0;
    for (;;) {
        const TreeNode& t = nodes[idx];
        if (t.is_leaf()) return t.mass_plus >= t.mass_minus ? 1 : -1;
        idx = x[t.feature] <= t.threshold ? t.left : t.right;
    }
}

// Drops nodes orphaned by pruning and renumbers children.
std::vector<TreeNode> compact(const std::vector<TreeNode>& nodes) {
    std::vector<TreeNode> out;
    // depth-first copy preserving child order
    struct Frame {
        int old_idx;
        int new_idx;
    };
    std::vector<Frame> frames;
    out.push_back(nodes[0]);
    frames.push_back({0, 0});
    while (!frames.empty()) {
        Frame f = frames.back();
        frames.pop_back();
        const TreeNode& src = nodes[f.old_idx];
        if (src.is_leaf()) {
            out[f.new_idx].feature = -1;
            out[f.new_idx].left = out[f.new_idx].right = -1;
            continue;
        }
        const int nl = static_cast<int>(out.size());
        out.push_back(nodes[src.left]);
        const int nr = static_cast<int>(out.size());
        out.push_back(nodes[src.right]);
        out[f.new_idx].left = nl;
        out[f.new_idx].right = nr;
        frames.push_back({src.left, nl});
        frames.push_back({src.right, nr});
    }
    return out;
}

// Picks the pruning strength by 5-fold stratified cross-validation over the
// weakest-link candidate grid, largest alpha on ties.
double select_alpha_by_cv(const BuildContext& ctx) {
    const auto& data = *ctx.data;
    const std::size_t n = data.size();

    std::vector<TreeNode> full;
    {
        BuildContext full_ctx = ctx;
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        build_node(full_ctx, full, std::move(all));
    }
    const std::vector<double> alphas = weakest_link_alphas(full, ctx.total_mass);
    if (alphas.empty()) return 0.0;

    std::vector<double> candidates{0.0};
    for (std::size_t k = 0; k + 1 < alphas.size(); ++k) {
        candidates.push_back(std::sqrt(alphas[k] * alphas[k + 1]));
    }
    candidates.push_back(alphas.back() * 2.0 + 1e-12);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    constexpr int kFolds = 5;
    std::vector<int> fold(n);
    int counter_plus = 0, counter_minus = 0;
    for (std::size_t i = 0; i < n; ++i) {
        int& counter = data.label(i) > 0 ? counter_plus : counter_minus;
        fold[i] = counter % kFolds;
        ++counter;
    }

    std::vector<double> cv_error(candidates.size(), 0.0);
    bool any_fold = false;
    for (int f = 0; f < kFolds; ++f) {
        std::vector<std::size_t> train_idx, eval_idx;
        std::size_t train_plus = 0, train_minus = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold[i] == f) {
                eval_idx.push_back(i);
            } else {
                train_idx.push_back(i);
                (data.label(i) > 0 ? train_plus : train_minus) += 1;
            }
        }
        if (eval_idx.empty() || train_plus == 0 || train_minus == 0) continue;
        any_fold = true;

        BuildContext fold_ctx = ctx;
        std::vector<TreeNode> fold_tree;
        build_node(fold_ctx, fold_tree, std::move(train_idx));

        for (std::size_t a = 0; a < candidates.size(); ++a) {
            std::vector<TreeNode> pruned = fold_tree;
            prune_at(pruned, 0, candidates[a], ctx.total_mass);
            double err = 0.0;
            for (std::size_t i : eval_idx) {
                if (tree_predict(pruned, data.point(i)) != data.label(i)) {
                    err += ctx.point_weight[i];
                }
            }
            cv_error[a] += err;
        }
    }
    if (!any_fold) return 0.0;

    std::size_t best = 0;
    for (std::size_t a = 1; a < candidates.size(); ++a) {
        if (cv_error[a] <= cv_error[best]) best = a;  // ties go to the larger alpha
    }
    return candidates[best];
}

}  // namespace

TrainedModel train_tree(const LabeledDataset& dataset, const ClassWeights& weights,
                        const TrainConfig& config) {
    config.validate();
    const std::size_t n = dataset.size();

    BuildContext ctx;
    ctx.data = &dataset;
    ctx.min_leaf_weight = config.tree_min_leaf_weight;
    ctx.point_weight.resize(n);
    ctx.total_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ctx.point_weight[i] = weights.for_label(dataset.label(i)) * dataset.base_weight(i);
        ctx.total_mass += ctx.point_weight[i];
    }

    const double alpha = config.tree_cc_alpha ? *config.tree_cc_alpha : select_alpha_by_cv(ctx);

    std::vector<TreeNode> nodes;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    build_node(ctx, nodes, std::move(all));
    if (alpha > 0.0) prune_at(nodes, 0, alpha, ctx.total_mass);

    TrainDiagnostics diag;
    diag.cc_alpha = alpha;
    TreeParams tp;
    tp.nodes = compact(nodes);
    return TrainedModel(std::move(tp), diag);
}

}  // namespace isoprob
