#pragma once

#include <algorithm>
#include <optional>
#include <span>

#include "../geometry.hpp"
#include "chambolle_pock.hpp"

namespace dgct {

struct SolveResult {
    Image x;
    SolverReport report;
};

/// 1/2 ||Ax - y||^2 + lambda * smoothed_tpv_value(x, p, eta): the objective the
/// IRL1 reweighting descends on.
template <LinearOperator Op>
double smoothed_tpv_objective(const Op& A, std::span<const double> y, const Image& x, double lambda, double p,
                              double eta)
{
    std::vector<double> ax(A.rows());
    A.apply(x.span(), ax);
    double fit = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i)
        fit += (ax[i] - y[i]) * (ax[i] - y[i]);
    return 0.5 * fit + lambda * smoothed_tpv_value(x, p, eta);
}

/// Non-convex TpV reconstruction by iteratively reweighted l1.
///
/// Every `inner_iters_per_reweight` CP iterations the weights are refreshed
/// from the current iterate; CP primal and dual variables carry over between
/// reweights. iterations_used counts CP iterations summed over all reweights.
/// objective_trace holds the weighted-TV objective of each CP iteration and
/// outer_objective_trace the smoothed TpV objective at every reweight plus the
/// final iterate.
template <LinearOperator Op>
SolveResult irl1_tpv_solve(const Op& A, std::span<const double> y, const Image& x0, const SolverConfig& cfg,
                           std::optional<CPSteps> steps = std::nullopt)
{
    cfg.validate();
    detail::require_domain(vec::min_value(x0.span()) >= 0.0, "irl1_tpv_solve: x0 must be nonnegative");
    const CPSteps s = steps ? *steps : resolve_cp_steps(A, cfg);

    detail::Stopwatch clock;
    SolverReport rep;
    rep.method = "tpv-cp";
    Image x = x0;
    std::optional<CPState> state;
    double eta = cfg.eta;

    while (rep.iterations_used < cfg.max_total_iters) {
        if (cfg.eta <= 0.0)
            eta = default_eta(x);
        const WeightMap w = reweight(x, cfg.p, eta);
        rep.outer_objective_trace.push_back(smoothed_tpv_objective(A, y, x, cfg.lambda, cfg.p, eta));

        const int budget = std::min(cfg.inner_iters_per_reweight, cfg.max_total_iters - rep.iterations_used);
        CPResult r = cp_weighted_solve(A, y, w, x, cfg, budget, s, std::move(state));
        rep.iterations_used += r.report.iterations_used;
        rep.objective_trace.insert(rep.objective_trace.end(), r.report.objective_trace.begin(),
                                   r.report.objective_trace.end());
        rep.iterate_distance_trace.insert(rep.iterate_distance_trace.end(), r.report.iterate_distance_trace.begin(),
                                          r.report.iterate_distance_trace.end());
        x = std::move(r.x);
        state = std::move(r.state);
        if (r.report.stop_reason == StopReason::tolerance) {
            rep.stop_reason = StopReason::tolerance;
            break;
        }
    }
    rep.outer_objective_trace.push_back(smoothed_tpv_objective(A, y, x, cfg.lambda, cfg.p, eta));
    rep.eta_used = eta;
    rep.wall_time = clock.seconds();
    return {std::move(x), std::move(rep)};
}

inline SolveResult irl1_tpv_solve(const FanBeamGeometry& g, const Sinogram& y, const Image& x0,
                                  const SolverConfig& cfg)
{
    detail::require_dims(y.n_angles == g.n_angles && y.n_det == g.n_det, "irl1_tpv_solve: sinogram/geometry mismatch");
    return irl1_tpv_solve(FanBeamProjector(g), y.span(), x0, cfg);
}

} // namespace dgct
