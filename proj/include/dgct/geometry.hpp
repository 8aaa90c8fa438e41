#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "image.hpp"
#include "linear_operator.hpp"

namespace dgct {

/// Flat-detector fan-beam acquisition of an N x N image.
///
/// Lengths are in image-pixel units. The image occupies [-N/2, N/2]^2 with
/// pixel (r, c) covering x in [c - N/2, c + 1 - N/2], y in [r - N/2, r + 1 - N/2].
/// At view angle b the source sits at source_to_center * (cos b, sin b), the
/// detector centre at -center_to_detector * (cos b, sin b) and the detector
/// axis is (-sin b, cos b). Bins are centred symmetrically about the central ray.
struct FanBeamGeometry {
    int image_side = 0;
    int n_angles = 0;
    double angular_range = 0.0; ///< degrees
    int n_det = 0;
    double det_pixel_size = 1.0;
    double source_to_center = 0.0;
    double center_to_detector = 0.0;

    void validate() const
    {
        detail::require_dims(image_side >= 2, "geometry: image side must be >= 2");
        detail::require_dims(n_angles >= 1, "geometry: n_angles must be >= 1");
        detail::require_dims(n_det >= 1, "geometry: n_det must be >= 1");
        detail::require_dims(angular_range > 0.0 && angular_range <= 360.0,
                             "geometry: angular range must be in (0, 360]");
        detail::require_dims(det_pixel_size > 0.0 && source_to_center > 0.0 && center_to_detector > 0.0,
                             "geometry: distances must be positive");
        detail::require_dims(source_to_center > image_side * std::numbers::sqrt2 / 2.0,
                             "geometry: source must lie outside the image");
    }

    std::size_t image_size() const { return static_cast<std::size_t>(image_side) * image_side; }
    std::size_t data_size() const { return static_cast<std::size_t>(n_angles) * n_det; }

    /// View angle k in radians; uniform over [0, range), endpoint excluded.
    double angle(int k) const
    {
        return static_cast<double>(k) * angular_range / n_angles * std::numbers::pi / 180.0;
    }

    /// Detector-axis coordinate of the centre of bin d.
    double bin_offset(int d) const { return (d - 0.5 * (n_det - 1)) * det_pixel_size; }

    double source_to_detector() const { return source_to_center + center_to_detector; }

    /// Canonical one-line description; hashed into fingerprint().
    std::string describe() const
    {
        char buf[256];
        std::snprintf(buf, sizeof buf, "fan-flat;N=%d;angles=%d;range=%.17g;det=%d;pitch=%.17g;sc=%.17g;cd=%.17g",
                      image_side, n_angles, angular_range, n_det, det_pixel_size, source_to_center,
                      center_to_detector);
        return buf;
    }

    /// 64-bit FNV-1a of describe(), hex encoded.
    std::string fingerprint() const
    {
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char ch : describe()) {
            h ^= ch;
            h *= 1099511628211ull;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    bool operator==(const FanBeamGeometry&) const = default;
};

/// Geometry with the default detector (2N bins of unit pitch) and source and
/// detector both 2N pixel units from the rotation centre.
inline FanBeamGeometry build_geometry(int image_side, int n_angles, double angular_range)
{
    detail::require_dims(image_side >= 2, "build_geometry: N must be >= 2");
    detail::require_dims(n_angles >= 1, "build_geometry: n_angles must be >= 1");
    detail::require_dims(angular_range > 0.0 && angular_range <= 360.0,
                         "build_geometry: angular range must be in (0, 360]");
    FanBeamGeometry g;
    g.image_side = image_side;
    g.n_angles = n_angles;
    g.angular_range = angular_range;
    g.n_det = 2 * image_side;
    g.det_pixel_size = 1.0;
    g.source_to_center = 2.0 * image_side;
    g.center_to_detector = 2.0 * image_side;
    g.validate();
    return g;
}

struct Ray {
    double sx, sy; ///< source
    double dx, dy; ///< detector point minus source
};

inline Ray ray_for(const FanBeamGeometry& g, int a, int d)
{
    const double b = g.angle(a);
    const double cb = std::cos(b), sb = std::sin(b);
    const double u = g.bin_offset(d);
    const double px = -g.center_to_detector * cb - u * sb;
    const double py = -g.center_to_detector * sb + u * cb;
    const double sx = g.source_to_center * cb;
    const double sy = g.source_to_center * sb;
    return {sx, sy, px - sx, py - sy};
}

/// Siddon traversal: calls visit(pixel_index, intersection_length) for every
/// pixel the segment source -> detector bin crosses with positive length.
template <class Visitor>
void trace_ray(int side, const Ray& ray, Visitor&& visit)
{
    const double h = 0.5 * side;
    const double inf = std::numeric_limits<double>::infinity();
    const double len = std::hypot(ray.dx, ray.dy);
    constexpr double eps = 1e-12;

    double a_lo = 0.0, a_hi = 1.0;
    auto clip_axis = [&](double s, double d) {
        if (std::abs(d) > eps) {
            const double a0 = (-h - s) / d;
            const double a1 = (h - s) / d;
            a_lo = std::max(a_lo, std::min(a0, a1));
            a_hi = std::min(a_hi, std::max(a0, a1));
        } else if (s <= -h || s >= h) {
            a_hi = -1.0;
        }
    };
    clip_axis(ray.sx, ray.dx);
    clip_axis(ray.sy, ray.dy);
    if (a_lo >= a_hi)
        return;

    auto first_crossing = [&](double s, double d, double& next, double& step) {
        if (std::abs(d) <= eps) {
            next = inf;
            step = inf;
            return;
        }
        const double pos = s + a_lo * d + h; // in [0, side]
        const double plane = d > 0 ? std::floor(pos) + 1.0 : std::ceil(pos) - 1.0;
        next = (plane - h - s) / d;
        step = 1.0 / std::abs(d);
    };
    double nx, stepx, ny, stepy;
    first_crossing(ray.sx, ray.dx, nx, stepx);
    first_crossing(ray.sy, ray.dy, ny, stepy);

    double a_cur = a_lo;
    while (a_cur < a_hi) {
        const double a_next = std::min({nx, ny, a_hi});
        if (a_next > a_cur) {
            const double mid = 0.5 * (a_cur + a_next);
            const int c = static_cast<int>(std::floor(ray.sx + mid * ray.dx + h));
            const int r = static_cast<int>(std::floor(ray.sy + mid * ray.dy + h));
            if (c >= 0 && c < side && r >= 0 && r < side)
                visit(static_cast<std::size_t>(r) * side + c, (a_next - a_cur) * len);
        }
        if (nx <= a_next)
            nx += stepx;
        if (ny <= a_next)
            ny += stepy;
        a_cur = a_next;
    }
}

/// Matrix-free fan-beam projector A and its exact adjoint.
///
/// For small systems the intersection lengths are traced once and kept in
/// CSR form; larger systems re-trace every application. Both paths visit the
/// entries in the same order, so results are identical.
class FanBeamProjector {
public:
    static constexpr std::size_t kDefaultCacheLimit = 8'000'000;

    explicit FanBeamProjector(FanBeamGeometry geom, std::size_t cache_limit = kDefaultCacheLimit)
        : g_(std::move(geom))
    {
        g_.validate();
        if (cache_limit > 0)
            build_cache(cache_limit);
    }

    const FanBeamGeometry& geometry() const { return g_; }
    std::size_t rows() const { return g_.data_size(); }
    std::size_t cols() const { return g_.image_size(); }
    bool cached() const { return !row_ptr_.empty(); }

    void apply(std::span<const double> x, std::span<double> out) const
    {
        detail::require_dims(x.size() == cols() && out.size() == rows(), "forward_project: size mismatch");
        if (cached()) {
            for (std::size_t r = 0; r < rows(); ++r) {
                double s = 0.0;
                for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                    s += val_[k] * x[col_[k]];
                out[r] = s;
            }
            return;
        }
        for (int a = 0; a < g_.n_angles; ++a)
            for (int d = 0; d < g_.n_det; ++d) {
                double s = 0.0;
                trace_ray(g_.image_side, ray_for(g_, a, d), [&](std::size_t i, double l) { s += l * x[i]; });
                out[static_cast<std::size_t>(a) * g_.n_det + d] = s;
            }
    }

    void adjoint(std::span<const double> y, std::span<double> out) const
    {
        detail::require_dims(y.size() == rows() && out.size() == cols(), "back_project: size mismatch");
        std::fill(out.begin(), out.end(), 0.0);
        if (cached()) {
            for (std::size_t r = 0; r < rows(); ++r) {
                const double yr = y[r];
                if (yr == 0.0)
                    continue;
                for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                    out[col_[k]] += val_[k] * yr;
            }
            return;
        }
        for (int a = 0; a < g_.n_angles; ++a)
            for (int d = 0; d < g_.n_det; ++d) {
                const double yr = y[static_cast<std::size_t>(a) * g_.n_det + d];
                if (yr == 0.0)
                    continue;
                trace_ray(g_.image_side, ray_for(g_, a, d), [&](std::size_t i, double l) { out[i] += l * yr; });
            }
    }

    Sinogram forward(const Image& x) const
    {
        detail::require_dims(x.side == g_.image_side, "forward_project: image side does not match geometry");
        Sinogram y(g_.n_angles, g_.n_det);
        apply(x.span(), y.span());
        return y;
    }

    Image backward(const Sinogram& y) const
    {
        detail::require_dims(y.n_angles == g_.n_angles && y.n_det == g_.n_det,
                             "back_project: sinogram shape does not match geometry");
        Image x(g_.image_side);
        adjoint(y.span(), x.span());
        return x;
    }

private:
    void build_cache(std::size_t limit)
    {
        std::vector<std::size_t> ptr{0};
        std::vector<std::uint32_t> col;
        std::vector<double> val;
        ptr.reserve(rows() + 1);
        for (int a = 0; a < g_.n_angles; ++a)
            for (int d = 0; d < g_.n_det; ++d) {
                trace_ray(g_.image_side, ray_for(g_, a, d), [&](std::size_t i, double l) {
                    col.push_back(static_cast<std::uint32_t>(i));
                    val.push_back(l);
                });
                if (val.size() > limit)
                    return;
                ptr.push_back(val.size());
            }
        row_ptr_ = std::move(ptr);
        col_ = std::move(col);
        val_ = std::move(val);
    }

    FanBeamGeometry g_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> col_;
    std::vector<double> val_;
};

inline Sinogram forward_project(const FanBeamGeometry& g, const Image& x)
{
    return FanBeamProjector(g, 0).forward(x);
}

inline Image back_project(const FanBeamGeometry& g, const Sinogram& y)
{
    return FanBeamProjector(g, 0).backward(y);
}

} // namespace dgct
