#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "isoprob/errors.hpp"
#include "isoprob/svg.hpp"

namespace isoprob {

namespace {

constexpr int kLeft = 60;
constexpr int kRight = 150;
constexpr int kTop = 40;
constexpr int kBottom = 48;

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, a, b);
    return buf;
}

std::string escape_xml(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

SvgFigure::SvgFigure(double x_min, double x_max, double y_min, double y_max, int width,
                     int height)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), width_(width),
      height_(height) {
    if (!(x_min < x_max) || !(y_min < y_max)) {
        throw ConfigError("figure ranges must satisfy min < max");
    }
    if (width < kLeft + kRight + 50 || height < kTop + kBottom + 50) {
        throw ConfigError("figure canvas is too small");
    }
}

double SvgFigure::px(double x) const {
    return kLeft + (x - x_min_) / (x_max_ - x_min_) * (width_ - kLeft - kRight);
}

double SvgFigure::py(double y) const {
    return kTop + (y_max_ - y) / (y_max_ - y_min_) * (height_ - kTop - kBottom);
}

void SvgFigure::set_title(const std::string& title) { title_ = title; }

void SvgFigure::add_point(double x, double y, const std::string& color, double radius) {
    body_ += "<circle cx=\"" + fmt("%.2f", px(x)) + "\" cy=\"" + fmt("%.2f", py(y)) +
             "\" r=\"" + fmt("%.2f", radius) + "\" fill=\"" + color + "\" fill-opacity=\"0.7\"/>\n";
}

void SvgFigure::add_polyline(const std::vector<std::array<double, 2>>& points,
                             const std::string& color, double stroke_width) {
    if (points.size() < 2) return;
    std::string attr = "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
                       fmt("%.2f", stroke_width) + "\" points=\"";
    for (const auto& p : points) {
        attr += fmt("%.2f,%.2f ", px(p[0]), py(p[1]));
    }
    attr += "\"/>\n";
    body_ += attr;
}

void SvgFigure::add_label(double x, double y, const std::string& text, const std::string& color) {
    body_ += "<text x=\"" + fmt("%.2f", px(x)) + "\" y=\"" + fmt("%.2f", py(y)) +
             "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" + color + "\">" +
             escape_xml(text) + "</text>\n";
}

void SvgFigure::add_legend_entry(const std::string& text, const std::string& color) {
    legend_.emplace_back(text, color);
}

void SvgFigure::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
        << height_ << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n";
    out << "<rect width=\"" << width_ << "\" height=\"" << height_ << "\" fill=\"white\"/>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << width_ - kLeft - kRight
        << "\" height=\"" << height_ - kTop - kBottom
        << "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";

    // axis ticks, 5 per axis
    for (int k = 0; k <= 4; ++k) {
        const double fx = x_min_ + (x_max_ - x_min_) * k / 4.0;
        const double fy = y_min_ + (y_max_ - y_min_) * k / 4.0;
        const double tx = px(fx);
        const double ty = py(fy);
        out << "<line x1=\"" << fmt("%.2f", tx) << "\" y1=\"" << height_ - kBottom
            << "\" x2=\"" << fmt("%.2f", tx) << "\" y2=\"" << height_ - kBottom + 5
            << "\" stroke=\"#888888\"/>\n";
        out << "<text x=\"" << fmt("%.2f", tx) << "\" y=\"" << height_ - kBottom + 18
            << "\" font-size=\"10\" font-family=\"sans-serif\" fill=\"#444444\""
            << " text-anchor=\"middle\">" << fmt("%.4g", fx) << "</text>\n";
        out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt("%.2f", ty) << "\" x2=\"" << kLeft
            << "\" y2=\"" << fmt("%.2f", ty) << "\" stroke=\"#888888\"/>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt("%.2f", ty + 3)
            << "\" font-size=\"10\" font-family=\"sans-serif\" fill=\"#444444\""
            << " text-anchor=\"end\">" << fmt("%.4g", fy) << "</text>\n";
    }

    if (!title_.empty()) {
        out << "<text x=\"" << (kLeft + (width_ - kLeft - kRight) / 2) << "\" y=\"" << kTop - 14
            << "\" font-size=\"14\" font-family=\"sans-serif\" fill=\"#222222\""
            << " text-anchor=\"middle\">" << escape_xml(title_) << "</text>\n";
    }

    out << body_;

    double ly = kTop + 8;
    for (const auto& [text, color] : legend_) {
        out << "<line x1=\"" << width_ - kRight + 10 << "\" y1=\"" << fmt("%.2f", ly)
            << "\" x2=\"" << width_ - kRight + 30 << "\" y2=\"" << fmt("%.2f", ly)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << width_ - kRight + 36 << "\" y=\"" << fmt("%.2f", ly + 3.5)
            << "\" font-size=\"10\" font-family=\"sans-serif\" fill=\"#222222\">"
            << escape_xml(text) << "</text>\n";
        ly += 15;
    }

    out << "</svg>\n";
    if (!out.good()) throw ParseError("write failed: " + path);
}

std::string SvgFigure::level_color(std::size_t index, std::size_t count) {
    const double hue = 360.0 * static_cast<double>(index) /
                       static_cast<double>(std::max<std::size_t>(count, 1));
    const double s = 0.62;
    const double l = 0.42;
    const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
    const double x = c * (1.0 - std::abs(std::fmod(hue / 60.0, 2.0) - 1.0));
    const double m = l - c / 2.0;
    double r = 0.0, g = 0.0, b = 0.0;
    const int sextant = static_cast<int>(hue / 60.0) % 6;
    switch (sextant) {
        case 0: r = c; g = x; break;
        case 1: r = x; g = c; break;
        case 2: g = c; b = x; break;
        case 3: g = x; b = c; break;
        case 4: r = x; b = c; break;
        default: r = c; b = x; break;
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>((r + m) * 255.0),
                  static_cast<int>((g + m) * 255.0), static_cast<int>((b + m) * 255.0));
    return buf;
}

}  // namespace isoprob
