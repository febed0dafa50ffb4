#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "isoprob/errors.hpp"
#include "isoprob/isocurves.hpp"

namespace isoprob {

namespace {

// Undirected segment collection with exact-coordinate vertex merging.
// Adjacent cells compute a shared edge crossing from the same two node values
// with the same expression, so matching on raw doubles is reliable here.
class SegmentSoup {
public:
    void add(std::array<double, 2> a, std::array<double, 2> b) {
        if (a[0] == b[0] && a[1] == b[1]) return;  // degenerate corner hit
        const int ia = vertex(a);
        const int ib = vertex(b);
        const int id = static_cast<int>(segments_.size());
        segments_.push_back({ia, ib});
        adjacency_[ia].push_back(id);
        adjacency_[ib].push_back(id);
    }

    // Chains segments into polylines. A chain begins at the earliest unused
    // segment and extends both ways, always taking the earliest unused
    // neighbor, so output order is reproducible. Closed loops repeat their
    // first vertex at the end.
    std::vector<Polyline> chain() const {
        std::vector<char> used(segments_.size(), 0);
        std::vector<Polyline> out;

        const auto next_segment = [&](int vertex_id) -> int {
            for (int sid : adjacency_[vertex_id]) {
                if (!used[sid]) return sid;
            }
            return -1;
        };

        for (std::size_t s = 0; s < segments_.size(); ++s) {
            if (used[s]) continue;
            used[s] = 1;
            std::deque<int> verts{segments_[s][0], segments_[s][1]};

            for (int sid = next_segment(verts.back()); sid >= 0;
                 sid = next_segment(verts.back())) {
                used[sid] = 1;
                verts.push_back(other_end(sid, verts.back()));
            }
            for (int sid = next_segment(verts.front()); sid >= 0;
                 sid = next_segment(verts.front())) {
                used[sid] = 1;
                verts.push_front(other_end(sid, verts.front()));
            }

            Polyline line;
            line.reserve(verts.size());
            for (int v : verts) line.push_back(points_[v]);
            out.push_back(std::move(line));
        }
        return out;
    }

private:
    int vertex(const std::array<double, 2>& p) {
        const auto [it, inserted] =
            index_.try_emplace(std::make_pair(p[0], p[1]), static_cast<int>(points_.size()));
        if (inserted) {
            points_.push_back(p);
            adjacency_.emplace_back();
        }
        return it->second;
    }

    int other_end(int segment_id, int vertex_id) const {
        const auto& s = segments_[segment_id];
        return s[0] == vertex_id ? s[1] : s[0];
    }

    std::vector<std::array<double, 2>> points_;
    std::map<std::pair<double, double>, int> index_;
    std::vector<std::array<int, 2>> segments_;
    std::vector<std::vector<int>> adjacency_;
};

}  // namespace

std::vector<Polyline> extract_zero_contour(const std::vector<double>& field, const Grid2D& grid) {
    grid.validate();
    if (field.size() != grid.nx * grid.ny) {
        throw ConfigError("field size does not match grid: expected " +
                          std::to_string(grid.nx * grid.ny) + ", got " +
                          std::to_string(field.size()));
    }
    for (double v : field) {
        if (!std::isfinite(v)) throw EstimationError("contour field contains a non-finite value");
    }

    const auto at = [&](std::size_t i, std::size_t j) { return field[i * grid.ny + j]; };
    SegmentSoup soup;

    for (std::size_t i = 0; i + 1 < grid.nx; ++i) {
        for (std::size_t j = 0; j + 1 < grid.ny; ++j) {
            // corner 0 = (i,j), 1 = (i+1,j), 2 = (i+1,j+1), 3 = (i,j+1)
            const double v0 = at(i, j);
            const double v1 = at(i + 1, j);
            const double v2 = at(i + 1, j + 1);
            const double v3 = at(i, j + 1);
            const int mask = (v0 >= 0.0 ? 1 : 0) | (v1 >= 0.0 ? 2 : 0) | (v2 >= 0.0 ? 4 : 0) |
                             (v3 >= 0.0 ? 8 : 0);
            if (mask == 0 || mask == 15) continue;

            const double x0 = grid.x_at(i);
            const double x1 = grid.x_at(i + 1);
            const double y0 = grid.y_at(j);
            const double y1 = grid.y_at(j + 1);
            const auto lerp = [](double a, double b, double va, double vb) {
                return a + (va / (va - vb)) * (b - a);
            };
            // crossing on each cell edge (valid only when its corners differ)
            const std::array<double, 2> e_bottom{lerp(x0, x1, v0, v1), y0};
            const std::array<double, 2> e_right{x1, lerp(y0, y1, v1, v2)};
            const std::array<double, 2> e_top{lerp(x0, x1, v3, v2), y1};
            const std::array<double, 2> e_left{x0, lerp(y0, y1, v0, v3)};

            switch (mask) {
                case 1: case 14: soup.add(e_left, e_bottom); break;
                case 2: case 13: soup.add(e_bottom, e_right); break;
                case 3: case 12: soup.add(e_left, e_right); break;
                case 4: case 11: soup.add(e_right, e_top); break;
                case 6: case 9: soup.add(e_bottom, e_top); break;
                case 7: case 8: soup.add(e_top, e_left); break;
                case 5: case 10: {
                    // saddle: disambiguate by the cell-center average
                    const bool center_pos = (v0 + v1 + v2 + v3) * 0.25 >= 0.0;
                    const bool corners02 = mask == 5;  // "+" at corners 0 and 2
                    if (corners02 == center_pos) {
                        soup.add(e_bottom, e_right);
                        soup.add(e_top, e_left);
                    } else {
                        soup.add(e_left, e_bottom);
                        soup.add(e_right, e_top);
                    }
                    break;
                }
                default: break;
            }
        }
    }
    return soup.chain();
}

std::vector<Polyline> extract_label_boundary(const std::vector<int>& labels, const Grid2D& grid) {
    grid.validate();
    if (labels.size() != grid.nx * grid.ny) {
        throw ConfigError("label field size does not match grid: expected " +
                          std::to_string(grid.nx * grid.ny) + ", got " +
                          std::to_string(labels.size()));
    }

    const auto at = [&](std::size_t i, std::size_t j) { return labels[i * grid.ny + j] > 0; };
    const double hx = 0.5 * grid.dx();
    const double hy = 0.5 * grid.dy();
    // Half-index coordinates keep collinear neighbor edges bit-identical at
    // their shared endpoints so that chaining joins them.
    const auto x_half = [&](std::size_t k) { return grid.x_min + static_cast<double>(k) * hx; };
    const auto y_half = [&](std::size_t k) { return grid.y_min + static_cast<double>(k) * hy; };
    const std::size_t x_half_max = 2 * (grid.nx - 1);
    const std::size_t y_half_max = 2 * (grid.ny - 1);
    SegmentSoup soup;

    // Each node owns a half-spacing rectangle; disagreeing neighbors emit
    // their shared rectangle edge, clipped to the grid extent.
    for (std::size_t i = 0; i < grid.nx; ++i) {
        for (std::size_t j = 0; j < grid.ny; ++j) {
            if (i + 1 < grid.nx && at(i, j) != at(i + 1, j)) {
                const double xm = x_half(2 * i + 1);
                const double y_lo = y_half(j == 0 ? 0 : 2 * j - 1);
                const double y_hi = y_half(std::min(2 * j + 1, y_half_max));
                soup.add({xm, y_lo}, {xm, y_hi});
            }
            if (j + 1 < grid.ny && at(i, j) != at(i, j + 1)) {
                const double ym = y_half(2 * j + 1);
                const double x_lo = x_half(i == 0 ? 0 : 2 * i - 1);
                const double x_hi = x_half(std::min(2 * i + 1, x_half_max));
                soup.add({x_lo, ym}, {x_hi, ym});
            }
        }
    }
    return soup.chain();
}

}  // namespace isoprob
