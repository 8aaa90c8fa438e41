#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "error.hpp"

namespace dgct {

/// Square image, row-major. Pixel (r, c) lives at data[r * side + c].
struct Image {
    int side = 0;
    std::vector<double> data;

    Image() = default;
    explicit Image(int n, double value = 0.0)
        : side(n), data(static_cast<std::size_t>(n) * n, value)
    {
        detail::require_dims(n >= 1, "image side must be positive");
    }

    std::size_t size() const { return data.size(); }
    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * side + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * side + c]; }

    std::span<double> span() { return data; }
    std::span<const double> span() const { return data; }

    bool operator==(const Image&) const = default;
};

/// Projection data, angle-major: bin (a, d) lives at data[a * n_det + d].
struct Sinogram {
    int n_angles = 0;
    int n_det = 0;
    std::vector<double> data;

    Sinogram() = default;
    Sinogram(int angles, int det, double value = 0.0)
        : n_angles(angles), n_det(det), data(static_cast<std::size_t>(angles) * det, value)
    {
        detail::require_dims(angles >= 1 && det >= 1, "sinogram dimensions must be positive");
    }

    std::size_t size() const { return data.size(); }
    double& operator()(int a, int d) { return data[static_cast<std::size_t>(a) * n_det + d]; }
    double operator()(int a, int d) const { return data[static_cast<std::size_t>(a) * n_det + d]; }

    std::span<double> row(int a) { return std::span<double>(data).subspan(static_cast<std::size_t>(a) * n_det, n_det); }
    std::span<const double> row(int a) const
    {
        return std::span<const double>(data).subspan(static_cast<std::size_t>(a) * n_det, n_det);
    }

    std::span<double> span() { return data; }
    std::span<const double> span() const { return data; }

    bool operator==(const Sinogram&) const = default;
};

// Small dense-vector helpers used throughout the solvers.
namespace vec {

inline double dot(std::span<const double> a, std::span<const double> b)
{
    detail::require_dims(a.size() == b.size(), "dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a)
{
    double m = 0.0;
    for (double v : a)
        m = std::max(m, std::abs(v));
    return m;
}

inline double distance(std::span<const double> a, std::span<const double> b)
{
    detail::require_dims(a.size() == b.size(), "distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
    detail::require_dims(x.size() == y.size(), "axpy: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += alpha * x[i];
}

inline void project_nonnegative(std::span<double> x)
{
    for (double& v : x)
        v = v < 0.0 ? 0.0 : v;
}

inline bool all_finite(std::span<const double> x)
{
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

inline double min_value(std::span<const double> x) { return *std::min_element(x.begin(), x.end()); }
inline double max_value(std::span<const double> x) { return *std::max_element(x.begin(), x.end()); }

} // namespace vec
} // namespace dgct
