#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <span>
#include <vector>

#include "../geometry.hpp"
#include "../image.hpp"
#include "../linear_operator.hpp"
#include "../operators.hpp"
#include "config.hpp"
#include "irl1.hpp"

namespace dgct {

/// ||Ax - y||^2 + mu * TV_beta(x)
template <LinearOperator Op>
double tv_beta_objective(const Op& A, std::span<const double> y, const Image& x, double mu, double beta)
{
    std::vector<double> ax(A.rows());
    A.apply(x.span(), ax);
    double fit = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i)
        fit += (ax[i] - y[i]) * (ax[i] - y[i]);
    return fit + mu * tv_beta_value(x, beta);
}

namespace detail {

// Positive part V of the split gradient grad TV_beta = V - U (x >= 0).
inline void tv_beta_split_positive(const Image& x, double beta, std::span<double> v)
{
    const int n = x.side;
    std::vector<double> inv_psi(x.size());
    const GradientField g = grad(x);
    for (std::size_t i = 0; i < g.size(); ++i)
        inv_psi[i] = 1.0 / std::sqrt(g.dh[i] * g.dh[i] + g.dv[i] * g.dv[i] + beta * beta);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * n + c;
            const int forward = (c + 1 < n) + (r + 1 < n);
            double s = forward * inv_psi[i];
            if (c > 0)
                s += inv_psi[i - 1];
            if (r > 0)
                s += inv_psi[i - n];
            v[i] = x.data[i] * s;
        }
}

} // namespace detail

/// Scaled gradient projection for  min_{x >= 0} ||Ax - y||^2 + mu TV_beta(x)
/// (mu is cfg.lambda, beta is cfg.beta).
///
/// The scaling follows the split-gradient rule x / V with V the positive part
/// of the gradient, clipped to bounds that shrink toward 1; the steplength alternates Barzilai-Borwein rules (ABB_min)
/// and a monotone Armijo backtracking keeps the objective non-increasing.
template <LinearOperator Op>
SolveResult sgp_tv_solve(const Op& A, std::span<const double> y, const Image& x0, const SolverConfig& cfg)
{
    cfg.validate();
    const std::size_t n = A.cols();
    detail::require_dims(y.size() == A.rows(), "sgp_tv_solve: data size does not match operator");
    detail::require_dims(x0.size() == n, "sgp_tv_solve: image does not match operator");
    detail::require_domain(vec::min_value(x0.span()) >= 0.0, "sgp_tv_solve: x0 must be nonnegative");
    const double mu = cfg.lambda, beta = cfg.beta;

    detail::Stopwatch clock;
    SolverReport rep;
    rep.method = "tv-sgp";

    std::vector<double> aty(n);
    A.adjoint(y, aty);

    Image x = x0, x_new(x0.side);
    std::vector<double> ax(A.rows()), ad(A.rows()), ax_trial(A.rows());
    std::vector<double> g(n), g_new(n), scale(n), vt(n), atax(n), d(n);
    A.apply(x.span(), ax);

    auto fit_of = [&](std::span<const double> a) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += (a[i] - y[i]) * (a[i] - y[i]);
        return s;
    };
    // Gradient and scaling at (x, ax); A^T A x costs one back projection.
    int scaling_calls = 0;
    auto gradient_and_scaling = [&](const Image& xi, std::span<const double> axi, std::vector<double>& gi) {
        ++scaling_calls;
        const double bound = std::sqrt(1.0 + cfg.sgp_scale_decay / (double(scaling_calls) * scaling_calls));
        A.adjoint(axi, atax);
        const Image gtv = tv_beta_gradient(xi, beta);
        detail::tv_beta_split_positive(xi, beta, vt);
        for (std::size_t i = 0; i < n; ++i) {
            gi[i] = 2.0 * (atax[i] - aty[i]) + mu * gtv.data[i];
            const double v = 2.0 * atax[i] + mu * vt[i];
            const double s = v > 0.0 ? xi.data[i] / v : (xi.data[i] > 0.0 ? bound : 1.0);
            scale[i] = std::clamp(s, 1.0 / bound, bound);
        }
    };

    double f = fit_of(ax) + mu * tv_beta_value(x, beta);
    gradient_and_scaling(x, ax, g);

    // Cauchy step along -Dg for the data term.
    double alpha;
    {
        for (std::size_t i = 0; i < n; ++i)
            d[i] = scale[i] * g[i];
        A.apply(d, ad);
        const double num = vec::dot(g, d);
        const double den = 2.0 * vec::dot(ad, ad);
        alpha = den > 0.0 ? num / den : 1.0;
        alpha = std::clamp(alpha, cfg.sgp_alpha_min, cfg.sgp_alpha_max);
    }
    std::deque<double> bb2_memory;
    double tau_abb = 0.5;

    for (int k = 0; k < cfg.max_total_iters; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const double v = x.data[i] - alpha * scale[i] * g[i];
            d[i] = (v > 0.0 ? v : 0.0) - x.data[i];
        }
        const double slope = vec::dot(g, d);
        A.apply(d, ad);

        double lam = 1.0, f_new = f;
        bool accepted = false;
        if (slope < 0.0) {
            for (int b = 0; b <= cfg.sgp_max_backtracks; ++b) {
                for (std::size_t i = 0; i < n; ++i)
                    x_new.data[i] = std::max(x.data[i] + lam * d[i], 0.0);
                for (std::size_t i = 0; i < ax.size(); ++i)
                    ax_trial[i] = ax[i] + lam * ad[i];
                f_new = fit_of(ax_trial) + mu * tv_beta_value(x_new, beta);
                if (f_new <= f + cfg.sgp_armijo_gamma * lam * slope) {
                    accepted = true;
                    break;
                }
                lam *= cfg.sgp_backtrack;
            }
        }
        rep.armijo_slope.push_back(slope);
        if (!accepted) {
            ++rep.line_search_failures;
            rep.armijo_step.push_back(0.0);
            rep.objective_trace.push_back(f);
            rep.iterate_distance_trace.push_back(0.0);
            ++rep.iterations_used;
            rep.stop_reason = StopReason::tolerance;
            break;
        }
        rep.armijo_step.push_back(lam);
        if (!std::isfinite(f_new))
            throw NumericalError("sgp_tv_solve: non-finite objective at iteration " + std::to_string(k));

        const double dist = vec::distance(x_new.span(), x.span());
        const double threshold = detail::stop_threshold(cfg, vec::norm2(x.span()));

        // s = x_{k+1} - x_k and z = g_{k+1} - g_k feed the BB rules with the new scaling.
        std::vector<double> s_vec(n);
        for (std::size_t i = 0; i < n; ++i)
            s_vec[i] = x_new.data[i] - x.data[i];
        std::swap(x.data, x_new.data);
        std::swap(ax, ax_trial);
        f = f_new;
        gradient_and_scaling(x, ax, g_new);

        double sds = 0, sdz = 0, szd = 0, zdz = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = g_new[i] - g[i];
            const double sc = scale[i];
            sds += s_vec[i] * s_vec[i] / (sc * sc);
            sdz += s_vec[i] * z / sc;
            szd += s_vec[i] * sc * z;
            zdz += z * sc * sc * z;
        }
        std::swap(g, g_new);
        const double bb1 = sdz > 0.0 ? std::clamp(sds / sdz, cfg.sgp_alpha_min, cfg.sgp_alpha_max) : cfg.sgp_alpha_max;
        const double bb2 = szd > 0.0 ? std::clamp(szd / zdz, cfg.sgp_alpha_min, cfg.sgp_alpha_max) : cfg.sgp_alpha_max;
        bb2_memory.push_back(bb2);
        if (static_cast<int>(bb2_memory.size()) > cfg.sgp_bb_memory)
            bb2_memory.pop_front();
        if (bb2 / bb1 <= tau_abb) {
            alpha = *std::min_element(bb2_memory.begin(), bb2_memory.end());
            tau_abb *= 0.9;
        } else {
            alpha = bb1;
            tau_abb *= 1.1;
        }

        rep.objective_trace.push_back(f);
        rep.iterate_distance_trace.push_back(dist);
        ++rep.iterations_used;
        if (dist < threshold) {
            rep.stop_reason = StopReason::tolerance;
            break;
        }
    }
    rep.wall_time = clock.seconds();
    return {std::move(x), std::move(rep)};
}

inline SolveResult sgp_tv_solve(const FanBeamGeometry& g, const Sinogram& y, const Image& x0, const SolverConfig& cfg)
{
    detail::require_dims(y.n_angles == g.n_angles && y.n_det == g.n_det, "sgp_tv_solve: sinogram/geometry mismatch");
    return sgp_tv_solve(FanBeamProjector(g), y.span(), x0, cfg);
}

} // namespace dgct
