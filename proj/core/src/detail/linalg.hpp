#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace isoprob::detail {

// Lower Cholesky factor of a row-major SPD matrix, or nullopt if the matrix
// is not (numerically) positive definite.
inline std::optional<std::vector<double>> cholesky(std::span<const double> a, std::size_t n) {
    std::vector<double> l(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) diag -= l[j * n + k] * l[j * n + k];
        if (!(diag > 0.0) || !std::isfinite(diag)) return std::nullopt;
        const double ljj = std::sqrt(diag);
        l[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
            l[i * n + j] = s / ljj;
        }
    }
    return l;
}

// Solves L L^T x = b in place given the lower factor.
inline void cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& b) {
    for (std::size_t i = 0; i < n; ++i) {  // forward: L y = b
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
        b[i] = s / l[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {  // backward: L^T x = y
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * b[k];
        b[ii] = s / l[ii * n + ii];
    }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace isoprob::detail
