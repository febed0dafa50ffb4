#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "fixtures.hpp"
#include "isoprob/classifiers.hpp"
#include "isoprob/dataset.hpp"
#include "isoprob/errors.hpp"

using isoprob::ClassifierKind;
using isoprob::ClassWeights;
using isoprob::ConfigError;
using isoprob::derive_class_weights;
using isoprob::LabeledDataset;
using isoprob::LinearParams;
using isoprob::ParseError;
using isoprob::TrainConfig;
using isoprob::TrainedModel;
using isoprob::TreeNode;
using isoprob::TreeParams;

namespace {

ClassWeights equal_weights(const LabeledDataset& data) {
    return derive_class_weights(data.positive_proportion(), data.positive_count(),
                                data.negative_count());
}

double boundary_1d(const TrainedModel& model) {
    return -model.linear().b / model.linear().w[0];
}

}  // namespace

// --- kind and config plumbing -------------------------------------------------

TEST_CASE("classifier kind names round-trip") {
    CHECK(isoprob::classifier_kind_from_string("svm") == ClassifierKind::svm);
    CHECK(isoprob::classifier_kind_from_string("logreg") == ClassifierKind::logreg);
    CHECK(isoprob::classifier_kind_from_string("tree") == ClassifierKind::tree);
    CHECK(std::string(isoprob::to_string(ClassifierKind::svm)) == "svm");
    CHECK(std::string(isoprob::to_string(ClassifierKind::logreg)) == "logreg");
    CHECK(std::string(isoprob::to_string(ClassifierKind::tree)) == "tree");
    CHECK_THROWS_AS(isoprob::classifier_kind_from_string("forest"), ConfigError);
}

TEST_CASE("TrainConfig::validate rejects bad values") {
    TrainConfig tc;
    tc.svm_c = 0.0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = TrainConfig{};
    tc.svm_max_sweeps = 0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = TrainConfig{};
    tc.logreg_tolerance = -1.0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = TrainConfig{};
    tc.tree_min_leaf_weight = 0.0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = TrainConfig{};
    tc.tree_cc_alpha = -0.5;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    CHECK_NOTHROW(TrainConfig{}.validate());
}

// --- score / predict ----------------------------------------------------------

TEST_CASE("linear score and predict") {
    TrainedModel svm(ClassifierKind::svm, LinearParams{{1.0, 0.0}, -1.0}, {});
    CHECK(svm.score(std::vector<double>{1.0, 0.0}) == 0.0);
    CHECK(svm.predict(std::vector<double>{1.0, 0.0}) == 1);  // ties go positive
    CHECK(svm.predict(std::vector<double>{0.5, 3.0}) == -1);

    TrainedModel lr(ClassifierKind::logreg, LinearParams{{2.0, 0.0}, -2.0}, {});
    CHECK(lr.score(std::vector<double>{1.5, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(svm.score(std::vector<double>{1.0}), ConfigError);
}

TEST_CASE("tree leaf score is the signed mass fraction") {
    TreeParams tp;
    TreeNode leaf;
    leaf.mass_plus = 3.0;
    leaf.mass_minus = 1.0;
    tp.nodes.push_back(leaf);
    TrainedModel tree(tp, {});
    CHECK(tree.score(std::vector<double>{0.0}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(tree.predict(std::vector<double>{0.0}) == 1);
}

TEST_CASE("model construction guards") {
    CHECK_THROWS_AS(TrainedModel(ClassifierKind::svm, LinearParams{{}, 0.0}, {}), ConfigError);
    CHECK_THROWS_AS(
        TrainedModel(ClassifierKind::svm, LinearParams{{std::nan("")}, 0.0}, {}), ConfigError);
    TreeParams empty_tree;
    CHECK_THROWS_AS(TrainedModel(std::move(empty_tree), {}), ConfigError);
}

// --- svm -----------------------------------------------------------------------

TEST_CASE("svm: symmetric pair puts the boundary at zero") {
    const LabeledDataset data = fixtures::symmetric_pair();
    const TrainedModel model = isoprob::train_svm(data, equal_weights(data), {});
    CHECK(model.kind() == ClassifierKind::svm);
    CHECK(std::abs(boundary_1d(model)) < 1e-6);
    CHECK(model.predict(std::vector<double>{2.0}) == 1);
    CHECK(model.predict(std::vector<double>{-2.0}) == -1);
}

TEST_CASE("svm: upweighting positives moves the boundary toward the negatives") {
    // The pair's weighted dual separates per coordinate (the augmented
    // features are orthogonal): alpha+ = min(1/2, 2*theta), alpha- =
    // min(1/2, 2*(1-theta)). For theta in [0.25, 0.75] neither cap binds, so
    // the solution is frozen at w=1, b=0; the boundary only starts moving once
    // a class multiplier caps its dual variable, and for theta > 0.75 it sits
    // at -(4*theta - 3) / (5 - 4*theta) exactly.
    const LabeledDataset data = fixtures::symmetric_pair();
    auto boundary_at = [&](double theta) {
        return boundary_1d(isoprob::train_svm(data, derive_class_weights(theta, 1, 1), {}));
    };

    // plateau: reweighting inside [0.25, 0.75] cannot move this boundary
    for (double theta : {0.25, 0.5, 0.75}) {
        CHECK(std::abs(boundary_at(theta)) <= 1e-12);
    }

    // outside the plateau the boundary obeys the closed form and moves
    // monotonically toward the negatives
    double prev = 0.0;
    for (double theta : {0.8, 0.85, 0.9, 0.95}) {
        const double cur = boundary_at(theta);
        const double expected = -(4.0 * theta - 3.0) / (5.0 - 4.0 * theta);
        CHECK(cur == doctest::Approx(expected).epsilon(1e-9));
        CHECK(cur < prev);
        CHECK(cur < 0.0);
        prev = cur;
    }
    // mirrored for downweighted positives
    CHECK(boundary_at(0.1) == doctest::Approx((4.0 * 0.9 - 3.0) / (5.0 - 4.0 * 0.9)).epsilon(1e-9));
    CHECK(boundary_at(0.1) > 0.0);
}

TEST_CASE("svm: reported duality gap is within tolerance and honest") {
    const LabeledDataset data = isoprob::gen_gaussian(fixtures::small_spec(100, 2));
    const TrainedModel model = isoprob::train_svm(data, equal_weights(data), {});
    const double primal =
        fixtures::svm_primal(data, equal_weights(data), 1.0, model.linear().w, model.linear().b);
    CHECK(model.diagnostics().duality_gap >= 0.0);
    CHECK(model.diagnostics().duality_gap <= 1e-6 * primal * (1.0 + 1e-9));
    CHECK(model.diagnostics().iterations > 0);
}

TEST_CASE("svm: near-optimal against a dumb grid search") {
    // The trained objective must not exceed the best value a dense external
    // grid search finds (the grid value itself is only approximate, so allow
    // the grid to win by its own resolution).
    const LabeledDataset data = fixtures::make_1d({-2.0, -0.5, 0.8, 2.2}, {-1, -1, 1, 1});
    for (double theta : {0.35, 0.5, 0.65}) {
        const ClassWeights cw = derive_class_weights(theta, 2, 2);
        const TrainedModel model = isoprob::train_svm(data, cw, {});
        const double trained =
            fixtures::svm_primal(data, cw, 1.0, model.linear().w, model.linear().b);
        const auto [gw, gb] = fixtures::svm_grid_search_1d(data, cw, 1.0);
        const double gridded = fixtures::svm_primal(data, cw, 1.0, {gw}, gb);
        CHECK(trained <= gridded + 1e-6 * std::max(1.0, gridded));
    }
}

TEST_CASE("svm: deterministic retraining") {
    const LabeledDataset data = isoprob::gen_gaussian(fixtures::small_spec(80, 4));
    const TrainedModel a = isoprob::train_svm(data, equal_weights(data), {});
    const TrainedModel b = isoprob::train_svm(data, equal_weights(data), {});
    CHECK(a.linear().w == b.linear().w);
    CHECK(a.linear().b == b.linear().b);
    CHECK(a.diagnostics().iterations == b.diagnostics().iterations);
}

TEST_CASE("svm: exhausted sweep budget throws with the best iterate attached") {
    const LabeledDataset data = fixtures::noisy_overlap();
    TrainConfig tc;
    tc.svm_max_sweeps = 1;
    try {
        isoprob::train_svm(data, equal_weights(data), tc);
        FAIL("expected SvmConvergenceError");
    } catch (const isoprob::SvmConvergenceError& e) {
        CHECK(e.gap() > 0.0);
        CHECK(e.best_model().kind() == ClassifierKind::svm);
        CHECK(std::isfinite(e.best_model().linear().b));
        CHECK(std::string(e.what()).find("gap") != std::string::npos);
    }
}

TEST_CASE("svm: support-vector filter keeps the margin and drops the interior") {
    const LabeledDataset data(2, {2.0, 0.0, 3.0, 1.0, -2.0, 0.0, -3.0, -1.0}, {1, 1, -1, -1}, {});
    TrainConfig tc;
    tc.svm_gap_tolerance = 1e-13;
    const TrainedModel model = isoprob::train_svm(data, equal_weights(data), tc);
    const LabeledDataset filtered = isoprob::filter_support_vectors(model, data);
    // (3,1) and (-3,-1) sit strictly outside the margin band
    REQUIRE(filtered.size() == 2);
    CHECK(filtered.point(0)[0] == 2.0);
    CHECK(filtered.point(1)[0] == -2.0);

    // retraining on the margin points reproduces the separator up to scale
    const TrainedModel again = isoprob::train_svm(filtered, equal_weights(filtered), tc);
    auto normalized = [](const TrainedModel& m) {
        std::vector<double> v = m.linear().w;
        v.push_back(m.linear().b);
        double norm = 0.0;
        for (double c : v) norm += c * c;
        norm = std::sqrt(norm);
        double lead = 0.0;
        for (double c : v) {
            if (c != 0.0) {
                lead = c;
                break;
            }
        }
        const double sign = lead < 0.0 ? -1.0 : 1.0;
        for (double& c : v) c = sign * c / norm;
        return v;
    };
    const auto u1 = normalized(model);
    const auto u2 = normalized(again);
    REQUIRE(u1.size() == u2.size());
    for (std::size_t i = 0; i < u1.size(); ++i) CHECK(std::abs(u1[i] - u2[i]) <= 1e-6);
}

TEST_CASE("svm: filtering requires an svm model and a surviving class") {
    const LabeledDataset data = fixtures::symmetric_pair();
    const TrainedModel lr = isoprob::train_logreg(data, equal_weights(data), {});
    CHECK_THROWS_AS(isoprob::filter_support_vectors(lr, data), ConfigError);
}

// --- logistic regression --------------------------------------------------------

TEST_CASE("logreg: symmetric pair puts the boundary at zero") {
    const LabeledDataset data = fixtures::symmetric_pair();
    const TrainedModel model = isoprob::train_logreg(data, equal_weights(data), {});
    CHECK(std::abs(boundary_1d(model)) < 1e-6);
}

TEST_CASE("logreg: converged gradient is tiny, recomputed independently") {
    const LabeledDataset data = isoprob::gen_gaussian(fixtures::small_spec(150, 6));
    const ClassWeights cw = equal_weights(data);
    const TrainedModel model = isoprob::train_logreg(data, cw, {});
    CHECK_FALSE(model.diagnostics().separable);
    CHECK(model.diagnostics().grad_inf_norm <= 1e-8);
    const auto grad = fixtures::logreg_gradient(data, cw, model.linear().w, model.linear().b);
    for (double g : grad) CHECK(std::abs(g) <= 2e-8);
}

TEST_CASE("logreg: upweighting positives moves the boundary toward the negatives") {
    const LabeledDataset data = isoprob::gen_gaussian(fixtures::small_spec(200, 9));
    const TrainedModel base = isoprob::train_logreg(data, derive_class_weights(0.5, 200, 200), {});
    const TrainedModel tilted =
        isoprob::train_logreg(data, derive_class_weights(0.75, 200, 200), {});
    // boundary along the x-axis: w1*x + b = 0 at y=0
    const double b0 = -base.linear().b / base.linear().w[0];
    const double b1 = -tilted.linear().b / tilted.linear().w[0];
    CHECK(b1 < b0);
}

TEST_CASE("logreg: weighted loss is at a local minimum") {
    const LabeledDataset data = isoprob::gen_gaussian(fixtures::small_spec(120, 13));
    const ClassWeights cw = derive_class_weights(0.6, 120, 120);
    const TrainedModel model = isoprob::train_logreg(data, cw, {});
    auto loss = [&](const std::vector<double>& w, double b) {
        double f = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            auto x = data.point(i);
            double z = b;
            for (std::size_t k = 0; k < data.dim(); ++k) z += w[k] * x[k];
            const double t = data.label(i) * z;
            const double l = t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
            f += cw.for_label(data.label(i)) * l;
        }
        return f;
    };
    const double f0 = loss(model.linear().w, model.linear().b);
    const double eps = 1e-4;
    for (std::size_t k = 0; k < 2; ++k) {
        std::vector<double> w = model.linear().w;
        w[k] += eps;
        CHECK(loss(w, model.linear().b) >= f0 - 1e-12);
        w[k] -= 2 * eps;
        CHECK(loss(w, model.linear().b) >= f0 - 1e-12);
    }
    CHECK(loss(model.linear().w, model.linear().b + eps) >= f0 - 1e-12);
    CHECK(loss(model.linear().w, model.linear().b - eps) >= f0 - 1e-12);
}

TEST_CASE("logreg: separable data stays finite; a starved budget flags it") {
    const LabeledDataset data =
        fixtures::make_1d({-3.0, -2.5, 2.5, 3.0}, {-1, -1, 1, 1});
    const TrainedModel model = isoprob::train_logreg(data, equal_weights(data), {});
    CHECK(std::isfinite(model.linear().w[0]));
    CHECK(std::isfinite(model.linear().b));
    CHECK(model.predict(std::vector<double>{3.0}) == 1);
    CHECK(model.predict(std::vector<double>{-3.0}) == -1);

    // With the budget cut before the gradient tolerance is met, the all-
    // positive-margin iterate is reported as separable.
    TrainConfig tc;
    tc.logreg_max_iter = 2;
    const TrainedModel starved = isoprob::train_logreg(data, equal_weights(data), tc);
    CHECK(starved.diagnostics().separable);
}

// --- decision tree ----------------------------------------------------------------

TEST_CASE("tree: four-point line splits exactly where enumeration says") {
    const LabeledDataset data = fixtures::four_point_line();
    TrainConfig tc;
    tc.tree_cc_alpha = 0.0;
    const TrainedModel model = isoprob::train_tree(data, equal_weights(data), tc);
    const auto& nodes = model.tree().nodes;
    REQUIRE_FALSE(nodes.empty());
    const TreeNode& root = nodes[0];
    REQUIRE_FALSE(root.is_leaf());
    CHECK(root.feature == 0);
    CHECK(root.threshold > 1.0);
    CHECK(root.threshold < 2.0);
    CHECK(root.threshold == 1.5);

    const auto brute = fixtures::enumerate_best_stump(data, equal_weights(data));
    CHECK(root.feature == brute.feature);
    CHECK(root.threshold == brute.threshold);

    // both children are pure leaves
    CHECK(nodes[root.left].is_leaf());
    CHECK(nodes[root.right].is_leaf());
    CHECK(model.predict(std::vector<double>{0.5}) == -1);
    CHECK(model.predict(std::vector<double>{2.5}) == 1);
}

TEST_CASE("tree: stump choice matches enumeration across weights and features") {
    // 2D dataset with competing splits on both axes.
    const LabeledDataset data(2,
                              {0.0, 0.0, 1.0, 0.2, 2.0, 1.1, 3.0, 0.9,
                               0.5, 2.0, 1.5, 2.2, 2.5, 3.0, 3.5, 2.8},
                              {-1, -1, 1, 1, -1, 1, 1, 1}, {});
    for (double theta : {0.3, 0.5, 0.7}) {
        const ClassWeights cw = derive_class_weights(theta, data.positive_count(),
                                                     data.negative_count());
        TrainConfig tc;
        tc.tree_cc_alpha = 0.0;
        const TrainedModel model = isoprob::train_tree(data, cw, tc);
        const TreeNode& root = model.tree().nodes[0];
        const auto brute = fixtures::enumerate_best_stump(data, cw);
        REQUIRE_FALSE(root.is_leaf());
        CHECK(root.feature == brute.feature);
        CHECK(root.threshold == brute.threshold);
    }
}

TEST_CASE("tree: unsplittable node becomes a majority leaf") {
    // all points stacked at one coordinate: nothing to split on
    const LabeledDataset data = fixtures::make_1d({1.0, 1.0, 1.0, 1.0}, {1, 1, 1, -1});
    TrainConfig tc;
    tc.tree_cc_alpha = 0.0;
    const TrainedModel model = isoprob::train_tree(data, equal_weights(data), tc);
    REQUIRE(model.tree().nodes.size() == 1);
    CHECK(model.tree().nodes[0].is_leaf());
    CHECK(model.score(std::vector<double>{1.0}) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("tree: min_leaf_weight blocks tiny leaves") {
    const LabeledDataset data = fixtures::four_point_line();
    TrainConfig tc;
    tc.tree_cc_alpha = 0.0;
    tc.tree_min_leaf_weight = 3.0;  // any split would leave < 3 on one side
    const TrainedModel model = isoprob::train_tree(data, equal_weights(data), tc);
    CHECK(model.tree().nodes.size() == 1);
    CHECK(model.tree().nodes[0].is_leaf());
}

TEST_CASE("tree: reweighting flips the mixed leaf at the predicted mass ratio") {
    const LabeledDataset data = fixtures::flip_fixture();
    TrainConfig tc;
    tc.tree_cc_alpha = 0.0;
    auto predict_at_2 = [&](double theta) {
        const ClassWeights cw = derive_class_weights(theta, 2, 3);
        const TrainedModel model = isoprob::train_tree(data, cw, tc);
        return model.predict(std::vector<double>{2.0});
    };
    CHECK(predict_at_2(0.20) == -1);
    CHECK(predict_at_2(0.24) == -1);
    CHECK(predict_at_2(fixtures::kFlipFixtureTheta) == 1);  // tie predicts positive
    CHECK(predict_at_2(0.26) == 1);
    CHECK(predict_at_2(0.60) == 1);
}

TEST_CASE("tree: large alpha prunes to the root, zero alpha keeps the full tree") {
    // mostly-negative line with an isolated positive pocket
    const LabeledDataset data = fixtures::make_1d(
        {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0},
        {-1, -1, -1, 1, 1, -1, -1, -1, -1, -1});
    TrainConfig full_cfg;
    full_cfg.tree_cc_alpha = 0.0;
    const TrainedModel full = isoprob::train_tree(data, equal_weights(data), full_cfg);
    REQUIRE(full.tree().nodes.size() > 1);
    CHECK(full.predict(std::vector<double>{3.5}) == 1);
    CHECK(full.predict(std::vector<double>{7.0}) == -1);

    TrainConfig pruned_cfg;
    pruned_cfg.tree_cc_alpha = 10.0;
    const TrainedModel pruned = isoprob::train_tree(data, equal_weights(data), pruned_cfg);
    CHECK(pruned.tree().nodes.size() == 1);
    CHECK(pruned.predict(std::vector<double>{3.5}) == -1);  // majority class
    CHECK(pruned.diagnostics().cc_alpha == 10.0);
}

TEST_CASE("tree: cross-validated alpha runs and records its choice") {
    const LabeledDataset data = isoprob::gen_gaussian(fixtures::small_spec(60, 21));
    const TrainedModel model = isoprob::train_tree(data, equal_weights(data), {});
    CHECK(model.diagnostics().cc_alpha >= 0.0);
    CHECK_FALSE(model.tree().nodes.empty());
    // deterministic: same data, same weights, same tree
    const TrainedModel again = isoprob::train_tree(data, equal_weights(data), {});
    REQUIRE(model.tree().nodes.size() == again.tree().nodes.size());
    for (std::size_t i = 0; i < model.tree().nodes.size(); ++i) {
        CHECK(model.tree().nodes[i].threshold == again.tree().nodes[i].threshold);
        CHECK(model.tree().nodes[i].feature == again.tree().nodes[i].feature);
    }
}

TEST_CASE("tree: node masses are consistent with the training weights") {
    const LabeledDataset data = fixtures::flip_fixture();
    const ClassWeights cw = derive_class_weights(0.4, 2, 3);
    TrainConfig tc;
    tc.tree_cc_alpha = 0.0;
    const TrainedModel model = isoprob::train_tree(data, cw, tc);
    const TreeNode& root = model.tree().nodes[0];
    CHECK(root.mass_plus == doctest::Approx(2 * cw.w_plus).epsilon(1e-12));
    CHECK(root.mass_minus == doctest::Approx(3 * cw.w_minus).epsilon(1e-12));
}

// --- generic dispatch and persistence ----------------------------------------------

TEST_CASE("train dispatches on kind and make_trainer captures the config") {
    const LabeledDataset data = fixtures::four_point_line();
    const ClassWeights cw = equal_weights(data);
    CHECK(isoprob::train(ClassifierKind::svm, data, cw, {}).kind() == ClassifierKind::svm);
    CHECK(isoprob::train(ClassifierKind::logreg, data, cw, {}).kind() == ClassifierKind::logreg);
    CHECK(isoprob::train(ClassifierKind::tree, data, cw, {}).kind() == ClassifierKind::tree);
    const auto trainer = isoprob::make_trainer(ClassifierKind::logreg, {});
    CHECK(trainer(data, cw).kind() == ClassifierKind::logreg);
}

TEST_CASE("model JSON round-trip preserves parameters bit for bit") {
    fixtures::TempDir tmp("model");
    const LabeledDataset data = isoprob::gen_gaussian(fixtures::small_spec(60, 31));
    const ClassWeights cw = equal_weights(data);

    for (ClassifierKind kind :
         {ClassifierKind::svm, ClassifierKind::logreg, ClassifierKind::tree}) {
        const TrainedModel model = isoprob::train(kind, data, cw, {});
        const std::string path = tmp.file(std::string("m_") + isoprob::to_string(kind) + ".json");
        isoprob::save_model(model, path);
        const TrainedModel back = isoprob::load_model(path);
        CHECK(back.kind() == model.kind());
        if (kind != ClassifierKind::tree) {
            CHECK(back.linear().w == model.linear().w);
            CHECK(back.linear().b == model.linear().b);
        } else {
            REQUIRE(back.tree().nodes.size() == model.tree().nodes.size());
            for (std::size_t i = 0; i < model.tree().nodes.size(); ++i) {
                CHECK(back.tree().nodes[i].feature == model.tree().nodes[i].feature);
                CHECK(back.tree().nodes[i].threshold == model.tree().nodes[i].threshold);
                CHECK(back.tree().nodes[i].mass_plus == model.tree().nodes[i].mass_plus);
                CHECK(back.tree().nodes[i].mass_minus == model.tree().nodes[i].mass_minus);
            }
        }
        // scores agree on a probe point
        const std::vector<double> probe{0.7, -0.3};
        CHECK(back.score(probe) == model.score(probe));
    }
}

TEST_CASE("model JSON rejects malformed input") {
    CHECK_THROWS_AS(isoprob::model_from_json("{not json"), ParseError);
    CHECK_THROWS_AS(isoprob::model_from_json(R"({"kind":"forest","w":[1],"b":0})"), ConfigError);
    CHECK_THROWS_AS(isoprob::model_from_json(R"({"kind":"svm","b":0})"), ParseError);
    CHECK_THROWS_AS(isoprob::load_model("/nonexistent/path/model.json"), ParseError);
}
