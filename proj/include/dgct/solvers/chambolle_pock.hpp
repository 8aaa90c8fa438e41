#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "../image.hpp"
#include "../linear_operator.hpp"
#include "../operator_norm.hpp"
#include "../operators.hpp"
#include "config.hpp"
#include "prox.hpp"

namespace dgct {

/// Primal and dual iterates of the Chambolle-Pock method.
struct CPState {
    Image x;
    Image x_bar;
    std::vector<double> p_dual; ///< one per data bin
    std::vector<double> q_dual; ///< [qh; qv], one pair per pixel
};

struct CPSteps {
    double sigma = 0.0;
    double tau = 0.0;
    double norm = 0.0; ///< ||[A; D]|| the steps were checked against
};

/// Resolves the CP step sizes from the configuration and checks
/// sigma * tau * ||[A; D]||^2 <= 1.
template <LinearOperator Op>
CPSteps resolve_cp_steps(const Op& A, const SolverConfig& cfg)
{
    CPSteps s;
    s.norm = cfg.operator_norm > 0.0 ? cfg.operator_norm
                                     : estimate_operator_norm(A, true, cfg.power_iterations);
    const double root = std::sqrt(cfg.cp_step_ratio);
    s.sigma = cfg.cp_sigma > 0.0 ? cfg.cp_sigma : 0.99 * root / s.norm;
    s.tau = cfg.cp_tau_step > 0.0 ? cfg.cp_tau_step : 0.99 / (root * s.norm);
    if (s.sigma * s.tau * s.norm * s.norm > 1.0 + 1e-12)
        throw NumericalError("CP step condition violated: sigma * tau * ||M||^2 = " +
                             std::to_string(s.sigma * s.tau * s.norm * s.norm) + " > 1");
    return s;
}

/// 1/2 ||Ax - y||^2 + lambda * sum_i w_i |Dx|_i
template <LinearOperator Op>
double weighted_tv_objective(const Op& A, std::span<const double> y, const WeightMap& w, double lambda,
                             const Image& x)
{
    std::vector<double> ax(A.rows());
    A.apply(x.span(), ax);
    double fit = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i)
        fit += (ax[i] - y[i]) * (ax[i] - y[i]);
    const GradientField g = grad(x);
    double reg = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        reg += w.w[i] * std::hypot(g.dh[i], g.dv[i]);
    return 0.5 * fit + lambda * reg;
}

struct CPResult {
    Image x;
    SolverReport report;
    CPState state;
};

/// Chambolle-Pock on  min_{x >= 0} 1/2 ||Ax - y||^2 + lambda ||w . |Dx| ||_1.
///
/// Runs at most `budget` iterations and stops early once
/// ||x_{k+1} - x_k|| drops below the configured tolerance. Passing `warm`
/// continues from a previous state (x0 is then ignored).
template <LinearOperator Op>
CPResult cp_weighted_solve(const Op& A, std::span<const double> y, const WeightMap& w, const Image& x0,
                           const SolverConfig& cfg, int budget, const CPSteps& steps,
                           std::optional<CPState> warm = std::nullopt)
{
    cfg.validate();
    detail::require_domain(budget >= 1, "cp_weighted_solve: budget must be >= 1");
    detail::require_dims(y.size() == A.rows(), "cp_weighted_solve: data size does not match operator");
    const std::size_t n = A.cols();
    const int side = warm ? warm->x.side : x0.side;
    detail::require_dims(static_cast<std::size_t>(side) * side == n, "cp_weighted_solve: image does not match operator");
    detail::require_dims(w.size() == n, "cp_weighted_solve: weight map size mismatch");
    if (steps.sigma * steps.tau * steps.norm * steps.norm > 1.0 + 1e-12)
        throw NumericalError("CP step condition violated");

    detail::Stopwatch clock;
    CPState st;
    if (warm) {
        st = std::move(*warm);
        detail::require_dims(st.p_dual.size() == A.rows() && st.q_dual.size() == 2 * n,
                             "cp_weighted_solve: warm state has wrong dimensions");
    } else {
        detail::require_domain(vec::min_value(x0.span()) >= 0.0, "cp_weighted_solve: x0 must be nonnegative");
        st.x = x0;
        st.x_bar = x0;
        st.p_dual.assign(A.rows(), 0.0);
        st.q_dual.assign(2 * n, 0.0);
    }

    const double sigma = steps.sigma, tau = steps.tau;
    const double p_den = cfg.three_sigma_denominator ? 1.0 + 3.0 * sigma : 1.0 + sigma;
    const GradientOperator D(side);

    std::vector<double> ax(A.rows()), ax_bar(A.rows()), ax_new(A.rows());
    std::vector<double> dx_bar(2 * n), dx_new(2 * n), atp(n), dtq(n);
    Image x_new(side);
    A.apply(st.x.span(), ax);
    A.apply(st.x_bar.span(), ax_bar);

    SolverReport rep;
    rep.method = "cp-weighted-tv";
    std::span<double> qh = std::span<double>(st.q_dual).first(n);
    std::span<double> qv = std::span<double>(st.q_dual).subspan(n);

    for (int k = 0; k < budget; ++k) {
        for (std::size_t i = 0; i < st.p_dual.size(); ++i)
            st.p_dual[i] = (st.p_dual[i] + sigma * (ax_bar[i] - y[i])) / p_den;

        D.apply(st.x_bar.span(), dx_bar);
        for (std::size_t i = 0; i < 2 * n; ++i)
            st.q_dual[i] += sigma * dx_bar[i];
        detail::clamp_dual_pairs(qh, qv, w.w, cfg.lambda);

        A.adjoint(st.p_dual, atp);
        D.adjoint(st.q_dual, dtq);
        const Image& base = cfg.primal_from_extrapolated ? st.x_bar : st.x;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = base.data[i] - tau * (atp[i] + dtq[i]);
            x_new.data[i] = v > 0.0 ? v : 0.0;
        }

        const double dist = vec::distance(x_new.span(), st.x.span());
        const double threshold = detail::stop_threshold(cfg, vec::norm2(st.x.span()));

        A.apply(x_new.span(), ax_new);
        D.apply(x_new.span(), dx_new);
        double fit = 0.0, reg = 0.0;
        for (std::size_t i = 0; i < ax_new.size(); ++i)
            fit += (ax_new[i] - y[i]) * (ax_new[i] - y[i]);
        for (std::size_t i = 0; i < n; ++i)
            reg += w.w[i] * std::hypot(dx_new[i], dx_new[n + i]);
        const double objective = 0.5 * fit + cfg.lambda * reg;
        if (!std::isfinite(objective))
            throw NumericalError("cp_weighted_solve: non-finite objective at iteration " + std::to_string(k));

        // x_bar = x_new + alpha (x_new - x); A x_bar follows by linearity.
        for (std::size_t i = 0; i < n; ++i)
            st.x_bar.data[i] = x_new.data[i] + cfg.cp_alpha * (x_new.data[i] - st.x.data[i]);
        for (std::size_t i = 0; i < ax.size(); ++i)
            ax_bar[i] = ax_new[i] + cfg.cp_alpha * (ax_new[i] - ax[i]);
        std::swap(st.x.data, x_new.data);
        std::swap(ax, ax_new);

        rep.objective_trace.push_back(objective);
        rep.iterate_distance_trace.push_back(dist);
        ++rep.iterations_used;
        if (dist < threshold) {
            rep.stop_reason = StopReason::tolerance;
            break;
        }
    }
    rep.wall_time = clock.seconds();
    Image out = st.x;
    return {std::move(out), std::move(rep), std::move(st)};
}

/// Convenience overload that resolves step sizes first.
template <LinearOperator Op>
CPResult cp_weighted_solve(const Op& A, std::span<const double> y, const WeightMap& w, const Image& x0,
                           const SolverConfig& cfg, int budget)
{
    return cp_weighted_solve(A, y, w, x0, cfg, budget, resolve_cp_steps(A, cfg));
}

} // namespace dgct
