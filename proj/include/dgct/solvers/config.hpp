#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "../error.hpp"

namespace dgct {

/// Every tunable of the iterative reconstructors. Zero-valued step sizes,
/// eta and operator_norm mean "derive automatically".
struct SolverConfig {
    double lambda = 1e-3;            ///< regularisation weight (lambda or mu)
    double p = 0.5;                  ///< TpV exponent
    double eta = 0.0;                ///< IRL1 smoothing; 0 = 1e-2 * dynamic range of the iterate
    double cp_sigma = 0.0;           ///< dual step; 0 = 0.99 sqrt(cp_step_ratio) / ||[A; D]||
    double cp_tau_step = 0.0;        ///< primal step; 0 = 0.99 / (sqrt(cp_step_ratio) ||[A; D]||)
    // sigma / tau for the automatic steps; the product stays 0.99^2 / ||M||^2.
    // ||A|| is far larger than ||D|| in pixel units, and equal steps leave the
    // TV dual crawling; 1 gives sigma = tau.
    double cp_step_ratio = 100.0;
    double cp_alpha = 1.0;           ///< extrapolation
    double tol = 1e-4;               ///< stopping tolerance on ||x_{k+1} - x_k||
    bool tol_relative = true;        ///< scale tol by ||x_k||
    int max_total_iters = 500;
    int inner_iters_per_reweight = 10;
    double beta = 1e-3;              ///< TV_beta smoothing
    std::uint64_t seed = 0;
    double operator_norm = 0.0;      ///< ||[A; D]|| (or ||A|| for FISTA); 0 = power method
    int power_iterations = 100;

    // Alternative CP update rules.
    bool three_sigma_denominator = false; ///< p-dual divides by 1 + 3 sigma instead of 1 + sigma
    bool primal_from_extrapolated = false; ///< primal step taken from x_bar instead of x

    // SGP
    double sgp_armijo_gamma = 1e-4;
    double sgp_backtrack = 0.5;
    int sgp_max_backtracks = 40;
    /// Scaling entries at iteration k are clipped to [1/r_k, r_k] with
    /// r_k = sqrt(1 + sgp_scale_decay / k^2), so the scaling tends to the identity.
    double sgp_scale_decay = 1e10;
    double sgp_alpha_min = 1e-10;
    double sgp_alpha_max = 1e10;
    int sgp_bb_memory = 3;

    // FISTA
    int wavelet_levels = 3;

    void validate() const
    {
        detail::require_domain(lambda >= 0.0, "config: lambda must be nonnegative");
        detail::require_domain(p > 0.0 && p <= 1.0, "config: p must lie in (0, 1]");
        detail::require_domain(eta >= 0.0, "config: eta must be nonnegative");
        detail::require_domain(cp_sigma >= 0.0 && cp_tau_step >= 0.0, "config: CP steps must be nonnegative");
        detail::require_domain(cp_step_ratio > 0.0, "config: cp_step_ratio must be positive");
        detail::require_domain(cp_alpha >= 0.0 && cp_alpha <= 1.0, "config: cp_alpha must lie in [0, 1]");
        detail::require_domain(tol > 0.0, "config: tol must be positive");
        detail::require_domain(max_total_iters >= 1, "config: max_total_iters must be >= 1");
        detail::require_domain(inner_iters_per_reweight >= 1, "config: inner_iters_per_reweight must be >= 1");
        detail::require_domain(beta > 0.0, "config: beta must be positive");
        detail::require_domain(sgp_scale_decay >= 0.0, "config: sgp_scale_decay must be nonnegative");
        detail::require_domain(power_iterations >= 1, "config: power_iterations must be >= 1");
    }
};

enum class StopReason { tolerance, max_iters };

inline const char* to_string(StopReason r) { return r == StopReason::tolerance ? "tolerance" : "max_iters"; }

/// Convergence record. objective_trace and iterate_distance_trace hold one
/// entry per iteration.
struct SolverReport {
    std::string method;
    int iterations_used = 0;
    StopReason stop_reason = StopReason::max_iters;
    std::vector<double> objective_trace;
    std::vector<double> iterate_distance_trace;
    double wall_time = 0.0;

    std::vector<double> outer_objective_trace; ///< IRL1: smoothed TpV objective at each reweight
    std::vector<double> armijo_step;           ///< SGP: accepted line-search step per iteration
    std::vector<double> armijo_slope;          ///< SGP: grad^T d per iteration
    int line_search_failures = 0;              ///< SGP
    double eta_used = 0.0;                     ///< IRL1
};

namespace detail {

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline double stop_threshold(const SolverConfig& cfg, double prev_norm)
{
    return cfg.tol_relative ? cfg.tol * prev_norm : cfg.tol;
}

} // namespace detail
} // namespace dgct
