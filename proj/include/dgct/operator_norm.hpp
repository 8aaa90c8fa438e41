#pragma once

#include <cstdint>
#include <vector>

#include "geometry.hpp"
#include "linear_operator.hpp"
#include "operators.hpp"

namespace dgct {

inline constexpr std::uint64_t kPowerMethodSeed = 0x5eed'0f'd9'c7ull;

/// Power-method estimate of ||A|| or, with include_gradient, of ||[A; D]||.
template <LinearOperator Op>
double estimate_operator_norm(const Op& A, bool include_gradient, int iterations,
                              std::uint64_t seed = kPowerMethodSeed)
{
    const std::size_t n = A.cols();
    std::vector<double> ax(A.rows());
    if (!include_gradient) {
        return detail::power_method(
            n,
            [&](std::span<const double> v, std::span<double> out) {
                A.apply(v, ax);
                A.adjoint(ax, out);
            },
            iterations, seed);
    }
    const GradientOperator D(detail::side_of(n));
    std::vector<double> dx(D.rows()), dtdx(n);
    return detail::power_method(
        n,
        [&](std::span<const double> v, std::span<double> out) {
            A.apply(v, ax);
            A.adjoint(ax, out);
            D.apply(v, dx);
            D.adjoint(dx, dtdx);
            vec::axpy(1.0, dtdx, out);
        },
        iterations, seed);
}

inline double estimate_operator_norm(const FanBeamGeometry& g, bool include_gradient, int iterations,
                                     std::uint64_t seed = kPowerMethodSeed)
{
    return estimate_operator_norm(FanBeamProjector(g), include_gradient, iterations, seed);
}

} // namespace dgct
