#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "error.hpp"
#include "image.hpp"

namespace dgct {

/// ||x - gt|| / ||gt||
inline double relative_error(const Image& x, const Image& gt)
{
    detail::require_dims(x.side == gt.side, "relative_error: image sizes differ");
    const double ng = vec::norm2(gt.span());
    detail::require_domain(ng > 0.0, "relative_error: ground truth is zero");
    return vec::distance(x.span(), gt.span()) / ng;
}

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
};

namespace detail {

inline std::vector<double> gaussian_window(int size, double sigma)
{
    std::vector<double> g(size);
    const double c = 0.5 * (size - 1);
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        g[i] = std::exp(-0.5 * (i - c) * (i - c) / (sigma * sigma));
        sum += g[i];
    }
    for (double& v : g)
        v /= sum;
    return g;
}

} // namespace detail

/// Mean structural similarity in [-100, 100] over all fully contained
/// Gaussian windows. The dynamic range L is taken from the ground truth
/// (1 if it is flat). Windows shrink to the image side for tiny images.
inline double ssim(const Image& x, const Image& gt, const SsimOptions& opt = {})
{
    detail::require_dims(x.side == gt.side, "ssim: image sizes differ");
    detail::require_domain(opt.window >= 1 && opt.sigma > 0.0, "ssim: bad window");
    const int n = gt.side;
    const int ws = std::min(opt.window, n);
    const std::vector<double> g = detail::gaussian_window(ws, opt.sigma);

    double range = vec::max_value(gt.span()) - vec::min_value(gt.span());
    if (range <= 0.0)
        range = 1.0;
    const double c1 = (opt.k1 * range) * (opt.k1 * range);
    const double c2 = (opt.k2 * range) * (opt.k2 * range);

    const int m = n - ws + 1;
    double total = 0.0;
    for (int r0 = 0; r0 < m; ++r0)
        for (int c0 = 0; c0 < m; ++c0) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int i = 0; i < ws; ++i)
                for (int j = 0; j < ws; ++j) {
                    const double wt = g[i] * g[j];
                    const double a = x(r0 + i, c0 + j), b = gt(r0 + i, c0 + j);
                    mx += wt * a;
                    my += wt * b;
                    sxx += wt * a * a;
                    syy += wt * b * b;
                    sxy += wt * a * b;
                }
            const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    return 100.0 * total / (static_cast<double>(m) * m);
}

} // namespace dgct
