#pragma once

#include <cstdint>
#include <random>

#include "geometry.hpp"
#include "image.hpp"

namespace dgct {

/// A ground truth and its simulated measurement.
struct TestProblem {
    FanBeamGeometry geometry;
    Image x_gt;
    Sinogram y;
    double nu = 0.0;
    std::uint64_t seed = 0;
};

/// Standard-normal vector of length m from a seeded generator.
inline std::vector<double> noise_realization(std::size_t m, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> e(m);
    for (double& v : e)
        v = gauss(rng);
    return e;
}

/// y = A x + nu * (||A x|| / ||e||) * e, so ||y - A x|| / ||A x|| = nu.
template <LinearOperator Op>
Sinogram simulate_sinogram(const Op& A, int n_angles, int n_det, const Image& x_gt, double nu, std::uint64_t seed)
{
    detail::require_domain(nu >= 0.0, "simulate_sinogram: nu must be nonnegative");
    Sinogram y(n_angles, n_det);
    detail::require_dims(y.size() == A.rows() && x_gt.size() == A.cols(), "simulate_sinogram: size mismatch");
    A.apply(x_gt.span(), y.span());
    if (nu == 0.0)
        return y;
    const std::vector<double> e = noise_realization(y.size(), seed);
    const double ne = vec::norm2(e);
    const double scale = nu * vec::norm2(y.span()) / ne;
    for (std::size_t i = 0; i < y.size(); ++i)
        y.data[i] += scale * e[i];
    return y;
}

inline Sinogram simulate_sinogram(const FanBeamGeometry& g, const Image& x_gt, double nu, std::uint64_t seed)
{
    detail::require_dims(x_gt.side == g.image_side, "simulate_sinogram: image side does not match geometry");
    return simulate_sinogram(FanBeamProjector(g), g.n_angles, g.n_det, x_gt, nu, seed);
}

inline TestProblem make_test_problem(const FanBeamGeometry& g, Image x_gt, double nu, std::uint64_t seed)
{
    TestProblem t{g, std::move(x_gt), {}, nu, seed};
    t.y = simulate_sinogram(g, t.x_gt, nu, seed);
    return t;
}

} // namespace dgct
