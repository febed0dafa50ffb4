#pragma once

#include <array>
#include <string>
#include <vector>

namespace isoprob {

// Minimal standalone-SVG figure writer: one fixed-size canvas, linear axes
// with ticks, scatter markers, polylines, and text labels. Data coordinates
// go in, pixel placement is handled internally.
class SvgFigure {
public:
    SvgFigure(double x_min, double x_max, double y_min, double y_max,
              int width = 760, int height = 560);

    void set_title(const std::string& title);
    void add_point(double x, double y, const std::string& color, double radius = 2.0);
    void add_polyline(const std::vector<std::array<double, 2>>& points,
                      const std::string& color, double stroke_width = 1.2);
    void add_label(double x, double y, const std::string& text, const std::string& color);
    void add_legend_entry(const std::string& text, const std::string& color);

    void write(const std::string& path) const;

    // Evenly spaced palette entry, stable across runs.
    static std::string level_color(std::size_t index, std::size_t count);

private:
    double px(double x) const;
    double py(double y) const;

    double x_min_, x_max_, y_min_, y_max_;
    int width_, height_;
    std::string title_;
    std::string body_;
    std::vector<std::pair<std::string, std::string>> legend_;
};

}  // namespace isoprob
