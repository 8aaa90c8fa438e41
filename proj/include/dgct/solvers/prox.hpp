#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "../error.hpp"
#include "../operators.hpp"

namespace dgct {

/// sign(v) * max(|v| - t, 0), elementwise.
inline std::vector<double> soft_threshold(std::span<const double> v, double t)
{
    detail::require_domain(t >= 0.0, "soft_threshold: threshold must be nonnegative");
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double m = std::abs(v[i]) - t;
        out[i] = m > 0.0 ? std::copysign(m, v[i]) : 0.0;
    }
    return out;
}

namespace detail {

// In-place radial clamp of the per-pixel pairs (qh_i, qv_i) to radius lambda * w_i.
inline void clamp_dual_pairs(std::span<double> qh, std::span<double> qv, std::span<const double> w, double lambda)
{
    for (std::size_t i = 0; i < qh.size(); ++i) {
        const double r = lambda * w[i];
        const double m = std::hypot(qh[i], qv[i]);
        if (m > r) {
            const double s = m > 0.0 ? r / m : 0.0;
            qh[i] *= s;
            qv[i] *= s;
        }
    }
}

} // namespace detail

/// Dual update for the weighted isotropic TV term: each pair q_i + sigma (D x_bar)_i
/// is projected onto the disc of radius lambda * w_i. q is laid out [qh; qv].
inline std::vector<double> dual_q_update(std::span<const double> q, const GradientField& g_bar, const WeightMap& w,
                                         double lambda, double sigma)
{
    const std::size_t n = g_bar.size();
    detail::require_dims(q.size() == 2 * n && w.size() == n, "dual_q_update: size mismatch");
    detail::require_domain(sigma > 0.0, "dual_q_update: sigma must be positive");
    std::vector<double> out(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = q[i] + sigma * g_bar.dh[i];
        out[n + i] = q[n + i] + sigma * g_bar.dv[i];
    }
    detail::clamp_dual_pairs(std::span<double>(out).first(n), std::span<double>(out).subspan(n), w.w, lambda);
    return out;
}

} // namespace dgct
