#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "isoprob/classifiers.hpp"
#include "isoprob/dataset.hpp"
#include "isoprob/posterior.hpp"

namespace isoprob {

// Uniform 2D sampling grid: nx * ny sample nodes (>= 2 per axis) spanning the
// closed ranges, cells between adjacent nodes.
struct Grid2D {
    double x_min = -1.0, x_max = 1.0;
    double y_min = -1.0, y_max = 1.0;
    std::size_t nx = 201, ny = 201;

    void validate() const;  // throws ConfigError
    double x_at(std::size_t i) const;
    double y_at(std::size_t j) const;
    double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
    double dy() const { return (y_max - y_min) / static_cast<double>(ny - 1); }

    // Data bounding box expanded by margin per side (default 20%).
    static Grid2D from_dataset(const LabeledDataset& dataset, double margin = 0.2,
                               std::size_t nx = 201, std::size_t ny = 201);
};

using Polyline = std::vector<std::array<double, 2>>;

struct IsoLevelCurves {
    double level = 0.5;              // posterior value this curve set traces
    double theta = 0.5;              // proportion whose model boundary realizes it
    std::vector<Polyline> polylines;
    std::string error;               // non-empty if training failed at this level
};

struct IsoCurveSet {
    std::vector<IsoLevelCurves> levels;  // sorted by level, strictly increasing
    double pi_plus = 0.5;
};

// Closed-form inverse of posterior_from_theta in its first argument:
// posterior_from_theta(theta_for_level(p, pi), pi) == p.
double theta_for_level(double level, double pi_plus);

// The default level ladder 0.05, 0.10, ..., 0.95.
std::vector<double> default_levels();

// One retraining per level: train at theta_for_level(p), extract the zero
// contour of the score field (svm/logreg) or the predicted-label boundary
// (tree) over the grid. Levels run independently across `jobs` threads;
// training failures are recorded per level and do not stop the sweep.
// For svm the support-vector subset is used when config enables filtering.
IsoCurveSet sweep_isocurves(const LabeledDataset& dataset, ClassifierKind kind,
                            const std::vector<double>& levels, const Grid2D& grid,
                            const EstimatorConfig& config = {},
                            const TrainConfig& train_config = {}, unsigned jobs = 1);

// Marching squares over a row-major nx*ny field (index i*ny + j). Vertices
// sit on cell edges via linear interpolation; saddle cells resolve by the
// sign of the cell-center average; polylines start at the lowest cell index.
std::vector<Polyline> extract_zero_contour(const std::vector<double>& field, const Grid2D& grid);

// Axis-aligned boundary between grid nodes of different predicted label
// (row-major nx*ny labels): shared edges of disagreeing node cells, chained.
std::vector<Polyline> extract_label_boundary(const std::vector<int>& labels, const Grid2D& grid);

// CSV rows `level,polyline_id,vertex_id,x,y`.
void write_isocurves_csv(const IsoCurveSet& set, const std::string& path);
// Standalone SVG: axes, class scatter, one labeled polyline group per level.
void write_isocurves_svg(const IsoCurveSet& set, const LabeledDataset& dataset,
                         const Grid2D& grid, const std::string& path);

}  // namespace isoprob
