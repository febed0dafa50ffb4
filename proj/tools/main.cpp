// isoprob command line: reproducible posterior estimation experiments.
//
// Subcommands: gen, fit, posterior, isocurves, calibrate, validate.
// Every output artifact gets a `<artifact>.manifest.json` describing the
// command, resolved configuration, seed, and input/output paths.
// Exit codes: 0 success, 2 configuration or parse error, 3 estimation error.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "isoprob/calibration.hpp"
#include "isoprob/classifiers.hpp"
#include "isoprob/dataset.hpp"
#include "isoprob/errors.hpp"
#include "isoprob/isocurves.hpp"
#include "isoprob/oracle.hpp"
#include "isoprob/parallel.hpp"
#include "isoprob/posterior.hpp"
#include "isoprob/svg.hpp"
#include "isoprob/version.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

struct Options {
    std::string spec_path;
    std::string data_path;
    std::string out_path;
    std::string svg_path;
    std::string classifier = "logreg";
    std::vector<double> point;
    std::vector<double> levels;
    isoprob::TrainConfig train;
    isoprob::EstimatorConfig est;
    double tree_cc_alpha = 0.0;  // bound only when the flag is present
    std::size_t grid_nx = 201;
    std::size_t grid_ny = 201;
    double grid_margin = 0.2;
    unsigned jobs = 1;
    std::uint64_t seed = 0;  // gen: overrides the spec seed when present
};

ordered_json train_config_json(const isoprob::TrainConfig& c) {
    ordered_json j;
    j["svm_c"] = c.svm_c;
    j["svm_max_sweeps"] = c.svm_max_sweeps;
    j["svm_gap_tolerance"] = c.svm_gap_tolerance;
    j["logreg_max_iter"] = c.logreg_max_iter;
    j["logreg_tolerance"] = c.logreg_tolerance;
    j["tree_min_leaf_weight"] = c.tree_min_leaf_weight;
    if (c.tree_cc_alpha) {
        j["tree_cc_alpha"] = *c.tree_cc_alpha;
    } else {
        j["tree_cc_alpha"] = nullptr;  // cross-validated
    }
    return j;
}

ordered_json estimator_config_json(const isoprob::EstimatorConfig& c) {
    ordered_json j;
    j["theta_lo"] = c.theta_lo;
    j["theta_hi"] = c.theta_hi;
    j["theta_tolerance"] = c.theta_tolerance;
    j["score_tolerance"] = c.score_tolerance;
    j["degeneracy_scan_points"] = c.degeneracy_scan_points;
    j["filter_svm_support_vectors"] = c.filter_svm_support_vectors;
    return j;
}

ordered_json estimate_json(const isoprob::PosteriorEstimate& est) {
    ordered_json j;
    j["probability"] = est.probability;
    j["interval"] = {est.interval_lo, est.interval_hi};
    j["theta_star"] = est.theta_star;
    j["bracket"] = {est.bracket_lo, est.bracket_hi};
    j["status"] = isoprob::to_string(est.status);
    j["all_roots"] = est.all_roots;
    j["pi_plus"] = est.pi_plus;
    return j;
}

void write_json_file(const ordered_json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw isoprob::ParseError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out.good()) throw isoprob::ParseError("write failed: " + path);
}

// One manifest per artifact; `outputs` lists everything the command produced.
void write_manifests(const std::string& command, const ordered_json& config,
                     const ordered_json& seed, const std::vector<std::string>& inputs,
                     const std::vector<std::string>& outputs) {
    ordered_json manifest;
    manifest["command"] = command;
    manifest["tool_version"] = isoprob::kVersion;
    manifest["seed"] = seed;
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs;
    manifest["config"] = config;
    for (const std::string& artifact : outputs) {
        write_json_file(manifest, artifact + ".manifest.json");
    }
}

isoprob::GaussianSpec load_spec_or_default(const std::string& path) {
    if (path.empty()) return isoprob::GaussianSpec{};
    return isoprob::load_gaussian_spec(path);
}

int run_gen(const Options& opts, bool seed_given) {
    isoprob::GaussianSpec spec = load_spec_or_default(opts.spec_path);
    if (seed_given) spec.seed = opts.seed;
    const isoprob::LabeledDataset data = isoprob::gen_gaussian(spec);
    isoprob::save_dataset(data, opts.out_path);

    ordered_json config;
    config["mu_plus"] = spec.mu_plus;
    config["mu_minus"] = spec.mu_minus;
    config["cov"] = spec.cov;
    config["n_per_class"] = spec.n_per_class;
    config["prior_plus"] = spec.prior_plus;
    std::vector<std::string> inputs;
    if (!opts.spec_path.empty()) inputs.push_back(opts.spec_path);
    write_manifests("gen", config, spec.seed, inputs, {opts.out_path});
    return 0;
}

int run_fit(const Options& opts) {
    const isoprob::LabeledDataset data = isoprob::load_dataset(opts.data_path);
    const isoprob::ClassifierKind kind = isoprob::classifier_kind_from_string(opts.classifier);
    // original weights: theta at the observed proportion, multipliers exactly 1
    const isoprob::ClassWeights w = isoprob::derive_class_weights(
        data.positive_proportion(), data.positive_count(), data.negative_count());
    const isoprob::TrainedModel model = isoprob::train(kind, data, w, opts.train);
    isoprob::save_model(model, opts.out_path);

    ordered_json config;
    config["classifier"] = opts.classifier;
    config["train"] = train_config_json(opts.train);
    write_manifests("fit", config, nullptr, {opts.data_path}, {opts.out_path});
    return 0;
}

int run_posterior(const Options& opts) {
    const isoprob::LabeledDataset data = isoprob::load_dataset(opts.data_path);
    const isoprob::ClassifierKind kind = isoprob::classifier_kind_from_string(opts.classifier);
    const isoprob::PosteriorEstimate est =
        isoprob::estimate_posterior(opts.point, kind, data, opts.est, opts.train);

    const ordered_json result = estimate_json(est);
    std::cout << result.dump(2) << '\n';
    if (!opts.out_path.empty()) {
        write_json_file(result, opts.out_path);
        ordered_json config;
        config["classifier"] = opts.classifier;
        config["point"] = opts.point;
        config["train"] = train_config_json(opts.train);
        config["estimator"] = estimator_config_json(opts.est);
        write_manifests("posterior", config, nullptr, {opts.data_path}, {opts.out_path});
    }
    return 0;
}

int run_isocurves(const Options& opts) {
    const isoprob::LabeledDataset data = isoprob::load_dataset(opts.data_path);
    const isoprob::ClassifierKind kind = isoprob::classifier_kind_from_string(opts.classifier);
    const std::vector<double> levels =
        opts.levels.empty() ? isoprob::default_levels() : opts.levels;
    const isoprob::Grid2D grid =
        isoprob::Grid2D::from_dataset(data, opts.grid_margin, opts.grid_nx, opts.grid_ny);
    const isoprob::IsoCurveSet set =
        isoprob::sweep_isocurves(data, kind, levels, grid, opts.est, opts.train, opts.jobs);

    isoprob::write_isocurves_csv(set, opts.out_path);
    std::vector<std::string> outputs{opts.out_path};
    if (!opts.svg_path.empty()) {
        isoprob::write_isocurves_svg(set, data, grid, opts.svg_path);
        outputs.push_back(opts.svg_path);
    }

    for (const isoprob::IsoLevelCurves& lc : set.levels) {
        if (!lc.error.empty()) {
            std::cerr << "level " << lc.level << " failed: " << lc.error << '\n';
        }
    }

    ordered_json config;
    config["classifier"] = opts.classifier;
    config["levels"] = levels;
    config["grid"] = {{"nx", opts.grid_nx}, {"ny", opts.grid_ny}, {"margin", opts.grid_margin}};
    config["jobs"] = opts.jobs;
    config["train"] = train_config_json(opts.train);
    config["estimator"] = estimator_config_json(opts.est);
    write_manifests("isocurves", config, nullptr, {opts.data_path}, outputs);
    return 0;
}

int run_calibrate(const Options& opts) {
    const isoprob::LabeledDataset data = isoprob::load_dataset(opts.data_path);
    const isoprob::ClassifierKind kind = isoprob::classifier_kind_from_string(opts.classifier);
    if (kind == isoprob::ClassifierKind::tree) {
        throw isoprob::ConfigError("tree models emit no raw score; calibration needs svm or logreg");
    }
    const std::vector<double> levels =
        opts.levels.empty() ? isoprob::default_levels() : opts.levels;
    const isoprob::Grid2D grid =
        isoprob::Grid2D::from_dataset(data, opts.grid_margin, opts.grid_nx, opts.grid_ny);
    const isoprob::IsoCurveSet set =
        isoprob::sweep_isocurves(data, kind, levels, grid, opts.est, opts.train, opts.jobs);

    const isoprob::ClassWeights w = isoprob::derive_class_weights(
        data.positive_proportion(), data.positive_count(), data.negative_count());
    const isoprob::TrainedModel original = isoprob::train(kind, data, w, opts.train);
    const isoprob::CalibrationTable table = isoprob::build_calibration_table(original, set);

    isoprob::write_calibration_csv(table, opts.out_path);
    std::vector<std::string> outputs{opts.out_path};
    if (!opts.svg_path.empty()) {
        isoprob::write_calibration_svg(table, opts.svg_path);
        outputs.push_back(opts.svg_path);
    }

    ordered_json config;
    config["classifier"] = opts.classifier;
    config["levels"] = levels;
    config["grid"] = {{"nx", opts.grid_nx}, {"ny", opts.grid_ny}, {"margin", opts.grid_margin}};
    config["train"] = train_config_json(opts.train);
    config["estimator"] = estimator_config_json(opts.est);
    write_manifests("calibrate", config, nullptr, {opts.data_path}, outputs);
    return 0;
}

int run_validate(const Options& opts) {
    const isoprob::GaussianSpec spec = isoprob::load_gaussian_spec(opts.spec_path);
    const isoprob::GaussianOracle oracle(spec);
    const isoprob::LabeledDataset data = opts.data_path.empty()
                                             ? isoprob::gen_gaussian(spec)
                                             : isoprob::load_dataset(opts.data_path);
    const isoprob::ClassifierKind kind = isoprob::classifier_kind_from_string(opts.classifier);
    const isoprob::Grid2D grid =
        isoprob::Grid2D::from_dataset(data, opts.grid_margin, opts.grid_nx, opts.grid_ny);

    const isoprob::WeightedTrainer trainer =
        isoprob::make_estimation_trainer(kind, opts.train, opts.est);

    const std::size_t n = grid.nx * grid.ny;
    std::vector<ordered_json> rows(n);
    std::vector<double> errors(n);
    isoprob::parallel_for(n, opts.jobs, [&](std::size_t idx) {
        const std::size_t i = idx / grid.ny;
        const std::size_t j = idx % grid.ny;
        const std::array<double, 2> x{grid.x_at(i), grid.y_at(j)};
        const isoprob::PosteriorEstimate est =
            kind == isoprob::ClassifierKind::tree
                ? isoprob::tree_flip_interval(x, data, opts.est, opts.train)
                : isoprob::estimate_posterior(x, trainer, data, opts.est);
        const double truth = oracle.true_posterior(x);
        errors[idx] = std::abs(est.probability - truth);
        ordered_json row;
        row["x"] = x;
        row["estimate"] = est.probability;
        row["truth"] = truth;
        row["abs_error"] = errors[idx];
        row["status"] = isoprob::to_string(est.status);
        rows[idx] = std::move(row);
    });

    double mae = 0.0;
    double max_error = 0.0;
    for (double e : errors) {
        mae += e;
        max_error = std::max(max_error, e);
    }
    mae /= static_cast<double>(n);

    ordered_json report;
    report["classifier"] = opts.classifier;
    report["grid"] = {{"nx", grid.nx}, {"ny", grid.ny}};
    report["n_points"] = n;
    report["mae"] = mae;
    report["max_error"] = max_error;
    report["points"] = rows;
    write_json_file(report, opts.out_path);
    std::cout << "mae=" << mae << " max_error=" << max_error << '\n';

    ordered_json config;
    config["classifier"] = opts.classifier;
    config["grid"] = {{"nx", opts.grid_nx}, {"ny", opts.grid_ny}, {"margin", opts.grid_margin}};
    config["jobs"] = opts.jobs;
    config["train"] = train_config_json(opts.train);
    config["estimator"] = estimator_config_json(opts.est);
    std::vector<std::string> inputs{opts.spec_path};
    if (!opts.data_path.empty()) inputs.push_back(opts.data_path);
    write_manifests("validate", config, spec.seed, inputs, {opts.out_path});
    return 0;
}

void add_train_flags(CLI::App* cmd, Options& opts) {
    cmd->add_option("--svm-c", opts.train.svm_c, "SVM cost parameter")->capture_default_str();
    cmd->add_option("--svm-max-sweeps", opts.train.svm_max_sweeps, "SVM sweep budget")
        ->capture_default_str();
    cmd->add_option("--svm-gap-tolerance", opts.train.svm_gap_tolerance,
                    "SVM relative duality gap target")
        ->capture_default_str();
    cmd->add_option("--logreg-max-iter", opts.train.logreg_max_iter, "Newton iteration budget")
        ->capture_default_str();
    cmd->add_option("--logreg-tolerance", opts.train.logreg_tolerance,
                    "gradient infinity-norm target")
        ->capture_default_str();
    cmd->add_option("--tree-min-leaf-weight", opts.train.tree_min_leaf_weight,
                    "smallest weighted mass per leaf")
        ->capture_default_str();
    cmd->add_option("--tree-cc-alpha", opts.tree_cc_alpha,
                    "cost-complexity pruning strength (default: 5-fold cross-validated; "
                    "0 keeps the full tree)");
}

void add_estimator_flags(CLI::App* cmd, Options& opts) {
    cmd->add_option("--theta-lo", opts.est.theta_lo, "lower end of the theta bracket")
        ->capture_default_str();
    cmd->add_option("--theta-hi", opts.est.theta_hi, "upper end of the theta bracket")
        ->capture_default_str();
    cmd->add_option("--theta-tolerance", opts.est.theta_tolerance, "bisection bracket width")
        ->capture_default_str();
    cmd->add_option("--score-tolerance", opts.est.score_tolerance, "near-zero score cutoff")
        ->capture_default_str();
    cmd->add_option("--degeneracy-scan-points", opts.est.degeneracy_scan_points,
                    "theta grid size for the multiple-root scan (< 2 disables)")
        ->capture_default_str();
    cmd->add_flag("--filter-sv,!--no-filter-sv", opts.est.filter_svm_support_vectors,
                  "estimate svm posteriors on the support-vector subset")
        ->capture_default_str();
}

void add_grid_flags(CLI::App* cmd, Options& opts) {
    cmd->add_option("--grid-nx", opts.grid_nx, "grid samples along x")->capture_default_str();
    cmd->add_option("--grid-ny", opts.grid_ny, "grid samples along y")->capture_default_str();
    cmd->add_option("--grid-margin", opts.grid_margin,
                    "bounding-box expansion per side, as a fraction")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"class posterior estimation by retraining under varied class weights"};
    app.set_version_flag("--version", std::string("isoprob ") + isoprob::kVersion);
    app.require_subcommand(1);

    Options opts;

    CLI::App* gen = app.add_subcommand("gen", "generate a two-Gaussian dataset CSV");
    gen->add_option("--spec", opts.spec_path, "GaussianSpec JSON (defaults when omitted)")
        ->check(CLI::ExistingFile);
    CLI::Option* seed_opt = gen->add_option("--seed", opts.seed, "override the spec seed");
    gen->add_option("--out", opts.out_path, "output dataset CSV")->required();

    CLI::App* fit = app.add_subcommand("fit", "train a classifier at the original weights");
    fit->add_option("--data", opts.data_path, "dataset CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--classifier", opts.classifier, "svm, logreg, or tree")
        ->capture_default_str();
    fit->add_option("--out", opts.out_path, "output model JSON")->required();
    add_train_flags(fit, opts);

    CLI::App* posterior = app.add_subcommand("posterior", "estimate P(+|x) at one query point");
    posterior->add_option("--data", opts.data_path, "dataset CSV")
        ->required()
        ->check(CLI::ExistingFile);
    posterior->add_option("--classifier", opts.classifier, "svm, logreg, or tree")
        ->capture_default_str();
    posterior->add_option("--point", opts.point, "query point coordinates, comma separated")
        ->required()
        ->delimiter(',');
    posterior->add_option("--out", opts.out_path, "write the JSON estimate here too");
    add_train_flags(posterior, opts);
    add_estimator_flags(posterior, opts);

    CLI::App* isocurves = app.add_subcommand("isocurves", "sweep iso-probability curves");
    isocurves->add_option("--data", opts.data_path, "dataset CSV")
        ->required()
        ->check(CLI::ExistingFile);
    isocurves->add_option("--classifier", opts.classifier, "svm, logreg, or tree")
        ->capture_default_str();
    isocurves->add_option("--levels", opts.levels, "posterior levels (default 0.05..0.95)")
        ->delimiter(',');
    isocurves->add_option("--out", opts.out_path, "output polyline CSV")->required();
    isocurves->add_option("--svg", opts.svg_path, "optional figure SVG");
    isocurves->add_option("--jobs", opts.jobs, "worker threads across levels")
        ->capture_default_str();
    add_grid_flags(isocurves, opts);
    add_train_flags(isocurves, opts);
    add_estimator_flags(isocurves, opts);

    CLI::App* calibrate = app.add_subcommand("calibrate", "score-to-probability table");
    calibrate->add_option("--data", opts.data_path, "dataset CSV")
        ->required()
        ->check(CLI::ExistingFile);
    calibrate->add_option("--classifier", opts.classifier, "svm or logreg")
        ->capture_default_str();
    calibrate->add_option("--levels", opts.levels, "posterior levels (default 0.05..0.95)")
        ->delimiter(',');
    calibrate->add_option("--out", opts.out_path, "output calibration CSV")->required();
    calibrate->add_option("--svg", opts.svg_path, "optional figure SVG");
    add_grid_flags(calibrate, opts);
    add_train_flags(calibrate, opts);
    add_estimator_flags(calibrate, opts);

    CLI::App* validate = app.add_subcommand("validate", "compare estimates to the Gaussian oracle");
    validate->add_option("--spec", opts.spec_path, "GaussianSpec JSON (oracle ground truth)")
        ->required()
        ->check(CLI::ExistingFile);
    validate->add_option("--data", opts.data_path,
                         "dataset CSV (generated from the spec when omitted)")
        ->check(CLI::ExistingFile);
    validate->add_option("--classifier", opts.classifier, "svm, logreg, or tree")
        ->capture_default_str();
    validate->add_option("--out", opts.out_path, "output report JSON")->required();
    validate->add_option("--jobs", opts.jobs, "worker threads across grid points")
        ->capture_default_str();
    add_grid_flags(validate, opts);
    add_train_flags(validate, opts);
    add_estimator_flags(validate, opts);
    validate->get_option("--grid-nx")->default_str("21");
    validate->get_option("--grid-ny")->default_str("21");
    validate->get_option("--grid-margin")->default_str("0");

    try {
        app.parse(argc, argv);

        // distinguish "flag absent" from any numeric value
        for (CLI::App* cmd : {fit, posterior, isocurves, calibrate, validate}) {
            if (cmd->parsed() && cmd->count("--tree-cc-alpha") > 0) {
                opts.train.tree_cc_alpha = opts.tree_cc_alpha;
            }
        }
        // validate compares on the data bounding box at oracle scale
        if (*validate) {
            if (validate->count("--grid-nx") == 0) opts.grid_nx = 21;
            if (validate->count("--grid-ny") == 0) opts.grid_ny = 21;
            if (validate->count("--grid-margin") == 0) opts.grid_margin = 0.0;
        }

        if (*gen) return run_gen(opts, seed_opt->count() > 0);
        if (*fit) return run_fit(opts);
        if (*posterior) return run_posterior(opts);
        if (*isocurves) return run_isocurves(opts);
        if (*calibrate) return run_calibrate(opts);
        if (*validate) return run_validate(opts);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const isoprob::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const isoprob::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
