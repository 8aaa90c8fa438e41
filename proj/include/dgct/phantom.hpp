#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "error.hpp"
#include "image.hpp"

namespace dgct {

/// Parameters of the synthetic "overlapping uniform lines and ellipses"
/// phantoms: a mid-grey disk support carrying additive uniform-contrast
/// ellipses and thin lines. Sizes are fractions of the image side.
struct PhantomSpec {
    std::uint64_t seed = 0;
    int side = 64;
    int min_ellipses = 3;
    int max_ellipses = 6;
    int min_lines = 1;
    int max_lines = 2;
    double contrast_min = -0.5;
    double contrast_max = 0.5;
    double min_abs_contrast = 0.1;
    double background = 0.2;
    double support_radius = 0.45;   ///< disk radius / side
    double axis_min = 0.04;         ///< ellipse semi-axis range / side
    double axis_max = 0.16;
    double line_length_min = 0.15;  ///< / side
    double line_length_max = 0.40;
    double line_width = 1.0;        ///< pixels

    void validate() const
    {
        detail::require_dims(side >= 2, "phantom: side must be >= 2");
        detail::require_domain(min_ellipses >= 0 && max_ellipses >= min_ellipses, "phantom: bad ellipse range");
        detail::require_domain(min_lines >= 0 && max_lines >= min_lines, "phantom: bad line range");
        detail::require_domain(contrast_min <= contrast_max, "phantom: bad contrast range");
        detail::require_domain(support_radius > 0.0 && support_radius <= 0.5, "phantom: support radius in (0, 0.5]");
        detail::require_domain(axis_min > 0.0 && axis_max >= axis_min, "phantom: bad axis range");
    }
};

/// Deterministic in spec.seed. Values are clamped to [0, 1].
inline Image generate_phantom(const PhantomSpec& spec)
{
    spec.validate();
    const int n = spec.side;
    std::mt19937_64 rng(spec.seed);
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    auto count = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto contrast = [&] {
        double c = 0.0;
        do
            c = uniform(spec.contrast_min, spec.contrast_max);
        while (std::abs(c) < spec.min_abs_contrast && spec.contrast_max - spec.contrast_min > 2 * spec.min_abs_contrast);
        return c;
    };

    const double centre = 0.5 * n;
    const double radius = spec.support_radius * n;
    auto inside_support = [&](double px, double py) {
        return (px - centre) * (px - centre) + (py - centre) * (py - centre) <= radius * radius;
    };

    Image x(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (inside_support(c + 0.5, r + 0.5))
                x(r, c) = spec.background;

    const int n_ell = count(spec.min_ellipses, spec.max_ellipses);
    for (int e = 0; e < n_ell; ++e) {
        const double rho = 0.7 * radius * std::sqrt(uniform(0.0, 1.0));
        const double phi = uniform(0.0, 2 * std::numbers::pi);
        const double cx = centre + rho * std::cos(phi), cy = centre + rho * std::sin(phi);
        const double a = uniform(spec.axis_min, spec.axis_max) * n;
        const double b = uniform(spec.axis_min, spec.axis_max) * n;
        const double th = uniform(0.0, std::numbers::pi);
        const double ct = std::cos(th), st = std::sin(th);
        const double v = contrast();
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                const double px = c + 0.5, py = r + 0.5;
                if (!inside_support(px, py))
                    continue;
                const double u = (px - cx) * ct + (py - cy) * st;
                const double w = -(px - cx) * st + (py - cy) * ct;
                if ((u * u) / (a * a) + (w * w) / (b * b) <= 1.0)
                    x(r, c) += v;
            }
    }

    const int n_lines = count(spec.min_lines, spec.max_lines);
    for (int l = 0; l < n_lines; ++l) {
        const double rho = 0.6 * radius * std::sqrt(uniform(0.0, 1.0));
        const double phi = uniform(0.0, 2 * std::numbers::pi);
        const double mx = centre + rho * std::cos(phi), my = centre + rho * std::sin(phi);
        const double half = 0.5 * uniform(spec.line_length_min, spec.line_length_max) * n;
        const double th = uniform(0.0, std::numbers::pi);
        const double dx = std::cos(th), dy = std::sin(th);
        const double v = contrast();
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                const double px = c + 0.5 - mx, py = r + 0.5 - my;
                if (!inside_support(c + 0.5, r + 0.5))
                    continue;
                const double along = px * dx + py * dy;
                const double across = -px * dy + py * dx;
                if (std::abs(along) <= half && std::abs(across) <= 0.5 * spec.line_width)
                    x(r, c) += v;
            }
    }

    for (double& v : x.data)
        v = std::clamp(v, 0.0, 1.0);
    return x;
}

/// Uniform disk of the given value; used for analytic-reconstruction checks.
inline Image disk_phantom(int side, double radius_fraction, double value)
{
    Image x(side);
    const double c0 = 0.5 * side, r0 = radius_fraction * side;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            const double dx = c + 0.5 - c0, dy = r + 0.5 - c0;
            if (dx * dx + dy * dy <= r0 * r0)
                x(r, c) = value;
        }
    return x;
}

} // namespace dgct
