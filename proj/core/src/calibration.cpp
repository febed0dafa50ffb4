#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "detail/format.hpp"
#include "isoprob/calibration.hpp"
#include "isoprob/errors.hpp"
#include "isoprob/svg.hpp"

namespace isoprob {

namespace {

double median(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

CalibrationTable build_calibration_table(const TrainedModel& original_model,
                                         const IsoCurveSet& isocurves) {
    if (original_model.kind() == ClassifierKind::tree) {
        throw ConfigError("tree models emit no raw score; calibration needs svm or logreg");
    }

    CalibrationTable table;
    for (const IsoLevelCurves& lc : isocurves.levels) {
        std::vector<double> scores;
        if (lc.error.empty()) {
            for (const Polyline& line : lc.polylines) {
                for (const auto& v : line) scores.push_back(original_model.score(v));
            }
        }
        if (scores.empty()) {
            table.skipped_levels.push_back(lc.level);
            continue;
        }
        table.rows.push_back({median(scores), lc.level, lc.theta});
    }

    table.resolution = 0.0;
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        const double gap = table.rows[i].probability - table.rows[i - 1].probability;
        if (table.resolution == 0.0 || gap < table.resolution) table.resolution = gap;
    }
    return table;
}

MonotoneMap isotonic_fit(std::span<const std::pair<double, double>> pairs,
                         std::span<const double> weights) {
    if (pairs.empty()) throw ConfigError("isotonic regression needs at least one point");
    if (!weights.empty() && weights.size() != pairs.size()) {
        throw ConfigError("isotonic weights must be empty or match the point count");
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (!std::isfinite(pairs[i].first) || !std::isfinite(pairs[i].second)) {
            throw ConfigError("isotonic regression input must be finite");
        }
        if (!weights.empty() && !(weights[i] > 0.0)) {
            throw ConfigError("isotonic weights must be > 0");
        }
    }

    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pairs[a].first != pairs[b].first) return pairs[a].first < pairs[b].first;
        return pairs[a].second < pairs[b].second;
    });

    // merge exact score ties to their weighted mean
    std::vector<double> xs, ys, ws;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        const double w = weights.empty() ? 1.0 : weights[i];
        if (!xs.empty() && pairs[i].first == xs.back()) {
            ys.back() = (ys.back() * ws.back() + pairs[i].second * w) / (ws.back() + w);
            ws.back() += w;
        } else {
            xs.push_back(pairs[i].first);
            ys.push_back(pairs[i].second);
            ws.push_back(w);
        }
    }

    // Pool adjacent violators: each block carries its weighted mean; a new
    // point that breaks monotonicity is merged backward until the means are
    // nondecreasing again. This is the exact least-squares monotone fit.
    struct Block {
        double weight;
        double mean;
        std::size_t count;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        blocks.push_back({ws[i], ys[i], 1});
        while (blocks.size() >= 2 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
            const Block top = blocks.back();
            blocks.pop_back();
            Block& prev = blocks.back();
            const double w = prev.weight + top.weight;
            prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w;
            prev.weight = w;
            prev.count += top.count;
        }
    }

    MonotoneMap map;
    map.breakpoints = std::move(xs);
    map.values.reserve(map.breakpoints.size());
    for (const Block& b : blocks) {
        for (std::size_t k = 0; k < b.count; ++k) map.values.push_back(b.mean);
    }
    return map;
}

double evaluate_map(const MonotoneMap& map, double score) {
    if (map.breakpoints.empty() || map.breakpoints.size() != map.values.size()) {
        throw ConfigError("monotone map is empty or inconsistent");
    }
    if (score <= map.breakpoints.front()) return map.values.front();
    if (score >= map.breakpoints.back()) return map.values.back();
    const auto it = std::upper_bound(map.breakpoints.begin(), map.breakpoints.end(), score);
    const std::size_t hi = static_cast<std::size_t>(it - map.breakpoints.begin());
    const std::size_t lo = hi - 1;
    const double t =
        (score - map.breakpoints[lo]) / (map.breakpoints[hi] - map.breakpoints[lo]);
    return map.values[lo] + t * (map.values[hi] - map.values[lo]);
}

void write_calibration_csv(const CalibrationTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "score,probability\n";
    for (const CalibrationRow& row : table.rows) {
        out << detail::format_double(row.score) << ',' << detail::format_double(row.probability)
            << '\n';
    }
    if (!out.good()) throw ParseError("write failed: " + path);
}

void write_calibration_svg(const CalibrationTable& table, const std::string& path) {
    double s_min = -1.0, s_max = 1.0;
    if (!table.rows.empty()) {
        s_min = std::numeric_limits<double>::infinity();
        s_max = -s_min;
        for (const CalibrationRow& row : table.rows) {
            s_min = std::min(s_min, row.score);
            s_max = std::max(s_max, row.score);
        }
        if (!(s_min < s_max)) {
            s_min -= 1.0;
            s_max += 1.0;
        }
        const double pad = 0.05 * (s_max - s_min);
        s_min -= pad;
        s_max += pad;
    }

    SvgFigure fig(s_min, s_max, 0.0, 1.0);
    fig.set_title("score calibration");
    for (const CalibrationRow& row : table.rows) {
        fig.add_point(row.score, row.probability, "#3465a4", 3.0);
    }
    fig.add_legend_entry("level medians", "#3465a4");

    if (table.rows.size() >= 2) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(table.rows.size());
        for (const CalibrationRow& row : table.rows) {
            pts.emplace_back(row.score, row.probability);
        }
        const MonotoneMap map = isotonic_fit(pts);
        Polyline line;
        line.reserve(map.breakpoints.size());
        for (std::size_t i = 0; i < map.breakpoints.size(); ++i) {
            line.push_back({map.breakpoints[i], map.values[i]});
        }
        fig.add_polyline(line, "#cc4444", 1.6);
        fig.add_legend_entry("isotonic fit", "#cc4444");
    }
    fig.write(path);
}

}  // namespace isoprob
