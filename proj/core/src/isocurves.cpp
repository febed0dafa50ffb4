#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "detail/format.hpp"
#include "isoprob/errors.hpp"
#include "isoprob/isocurves.hpp"
#include "isoprob/parallel.hpp"
#include "isoprob/svg.hpp"

namespace isoprob {

void Grid2D::validate() const {
    if (!(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(y_min) &&
          std::isfinite(y_max))) {
        throw ConfigError("grid ranges must be finite");
    }
    if (!(x_min < x_max) || !(y_min < y_max)) {
        throw ConfigError("grid ranges must satisfy min < max on both axes");
    }
    if (nx < 2 || ny < 2) throw ConfigError("grid needs at least 2 samples per axis");
}

double Grid2D::x_at(std::size_t i) const {
    return x_min + (x_max - x_min) * (static_cast<double>(i) / static_cast<double>(nx - 1));
}

double Grid2D::y_at(std::size_t j) const {
    return y_min + (y_max - y_min) * (static_cast<double>(j) / static_cast<double>(ny - 1));
}

Grid2D Grid2D::from_dataset(const LabeledDataset& dataset, double margin, std::size_t nx,
                            std::size_t ny) {
    if (dataset.dim() != 2) {
        throw ConfigError("grid from dataset requires 2-dimensional data, got dimension " +
                          std::to_string(dataset.dim()));
    }
    if (!(margin >= 0.0) || !std::isfinite(margin)) {
        throw ConfigError("grid margin must be finite and >= 0");
    }
    const auto box = dataset.bounds();
    Grid2D grid;
    grid.nx = nx;
    grid.ny = ny;
    const auto pad = [margin](double lo, double hi, double& out_lo, double& out_hi) {
        const double extent = hi - lo;
        const double p = extent > 0.0 ? margin * extent : 1.0;  // degenerate axis
        out_lo = lo - p;
        out_hi = hi + p;
    };
    pad(box[0].first, box[0].second, grid.x_min, grid.x_max);
    pad(box[1].first, box[1].second, grid.y_min, grid.y_max);
    grid.validate();
    return grid;
}

double theta_for_level(double level, double pi_plus) {
    if (!(level > 0.0 && level < 1.0)) {
        throw ConfigError("level must lie in the open unit interval");
    }
    if (!(pi_plus > 0.0 && pi_plus < 1.0)) {
        throw ConfigError("pi_plus must lie in the open unit interval");
    }
    // invert odds = ((1-theta) pi) / (theta (1-pi)) at odds = level/(1-level)
    const double odds = level / (1.0 - level);
    return pi_plus / (odds * (1.0 - pi_plus) + pi_plus);
}

std::vector<double> default_levels() {
    std::vector<double> levels;
    levels.reserve(19);
    for (int i = 1; i <= 19; ++i) levels.push_back(static_cast<double>(i) / 20.0);
    return levels;
}

IsoCurveSet sweep_isocurves(const LabeledDataset& dataset, ClassifierKind kind,
                            const std::vector<double>& levels, const Grid2D& grid,
                            const EstimatorConfig& config, const TrainConfig& train_config,
                            unsigned jobs) {
    grid.validate();
    config.validate();
    train_config.validate();
    if (dataset.dim() != 2) {
        throw ConfigError("isocurve sweep requires 2-dimensional data, got dimension " +
                          std::to_string(dataset.dim()));
    }
    if (levels.empty()) throw ConfigError("isocurve sweep needs at least one level");
    std::vector<double> sorted(levels);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (double level : sorted) {
        if (!(level > 0.0 && level < 1.0)) {
            throw ConfigError("levels must lie in the open unit interval");
        }
    }

    const WeightedTrainer trainer = make_estimation_trainer(kind, train_config, config);

    IsoCurveSet set;
    set.pi_plus = dataset.positive_proportion();
    set.levels.resize(sorted.size());

    parallel_for(sorted.size(), jobs, [&](std::size_t k) {
        IsoLevelCurves& out = set.levels[k];
        out.level = sorted[k];
        out.theta = theta_for_level(out.level, set.pi_plus);
        try {
            const ClassWeights w = derive_class_weights(out.theta, dataset.positive_count(),
                                                        dataset.negative_count());
            const TrainedModel model = trainer(dataset, w);
            if (kind == ClassifierKind::tree) {
                std::vector<int> labels(grid.nx * grid.ny);
                for (std::size_t i = 0; i < grid.nx; ++i) {
                    for (std::size_t j = 0; j < grid.ny; ++j) {
                        const std::array<double, 2> p{grid.x_at(i), grid.y_at(j)};
                        labels[i * grid.ny + j] = model.predict(p);
                    }
                }
                out.polylines = extract_label_boundary(labels, grid);
            } else {
                std::vector<double> field(grid.nx * grid.ny);
                for (std::size_t i = 0; i < grid.nx; ++i) {
                    for (std::size_t j = 0; j < grid.ny; ++j) {
                        const std::array<double, 2> p{grid.x_at(i), grid.y_at(j)};
                        field[i * grid.ny + j] = model.score(p);
                    }
                }
                out.polylines = extract_zero_contour(field, grid);
            }
        } catch (const std::exception& e) {
            out.error = e.what();  // keep the sweep going; the level stays empty
        }
    });
    return set;
}

void write_isocurves_csv(const IsoCurveSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "level,polyline_id,vertex_id,x,y\n";
    for (const IsoLevelCurves& lc : set.levels) {
        for (std::size_t p = 0; p < lc.polylines.size(); ++p) {
            const Polyline& line = lc.polylines[p];
            for (std::size_t v = 0; v < line.size(); ++v) {
                out << detail::format_double(lc.level) << ',' << p << ',' << v << ','
                    << detail::format_double(line[v][0]) << ','
                    << detail::format_double(line[v][1]) << '\n';
            }
        }
    }
    if (!out.good()) throw ParseError("write failed: " + path);
}

void write_isocurves_svg(const IsoCurveSet& set, const LabeledDataset& dataset,
                         const Grid2D& grid, const std::string& path) {
    grid.validate();
    SvgFigure fig(grid.x_min, grid.x_max, grid.y_min, grid.y_max);
    fig.set_title("iso-probability curves");

    if (dataset.dim() == 2) {
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            const auto p = dataset.point(i);
            fig.add_point(p[0], p[1], dataset.label(i) > 0 ? "#3465a4" : "#cc4444", 1.5);
        }
    }

    for (std::size_t k = 0; k < set.levels.size(); ++k) {
        const IsoLevelCurves& lc = set.levels[k];
        const std::string color = SvgFigure::level_color(k, set.levels.size());
        for (const Polyline& line : lc.polylines) {
            fig.add_polyline(line, color);
        }
        char label[32];
        std::snprintf(label, sizeof(label), "p=%.2f", lc.level);
        if (!lc.polylines.empty() && !lc.polylines.front().empty()) {
            const auto& v = lc.polylines.front().front();
            fig.add_label(v[0], v[1], label, color);
        }
        fig.add_legend_entry(lc.error.empty() ? label : std::string(label) + " (failed)", color);
    }
    fig.write(path);
}

}  // namespace isoprob
