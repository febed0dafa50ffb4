#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isoprob/classifiers.hpp"
#include "isoprob/isocurves.hpp"

namespace isoprob {

struct CalibrationRow {
    double score;        // median raw score of the level's contour vertices
    double probability;  // the level itself
    double theta;        // proportion that generated the level
};

struct CalibrationTable {
    std::vector<CalibrationRow> rows;   // ordered by level
    double resolution = 0.0;            // smallest gap between adjacent levels
    std::vector<double> skipped_levels; // levels whose contour was empty
};

// Piecewise-linear nondecreasing map from score to probability, clamped to
// the end values outside the breakpoint range.
struct MonotoneMap {
    std::vector<double> breakpoints;  // strictly increasing scores
    std::vector<double> values;       // nondecreasing probabilities
};

// Scores each level's contour vertices under the original (theta == pi_plus)
// model and pairs the median score with the level. Tree models have no raw
// score and are rejected with ConfigError.
CalibrationTable build_calibration_table(const TrainedModel& original_model,
                                         const IsoCurveSet& isocurves);

// Weighted least squares fit subject to nondecreasing values: pool adjacent
// violators, with exact score ties pre-merged by weighted mean. weights may
// be empty (all ones). Throws ConfigError on empty input.
MonotoneMap isotonic_fit(std::span<const std::pair<double, double>> pairs,
                         std::span<const double> weights = {});

double evaluate_map(const MonotoneMap& map, double score);

// CSV rows `score,probability`.
void write_calibration_csv(const CalibrationTable& table, const std::string& path);
// Standalone SVG scatter of the table plus the step of its isotonic fit.
void write_calibration_svg(const CalibrationTable& table, const std::string& path);

}  // namespace isoprob
