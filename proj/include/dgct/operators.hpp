#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "error.hpp"
#include "image.hpp"

namespace dgct {

/// Forward differences of an image. Neumann boundary: dh is zero on the last
/// column and dv is zero on the last row.
struct GradientField {
    int side = 0;
    std::vector<double> dh;
    std::vector<double> dv;

    GradientField() = default;
    explicit GradientField(int n)
        : side(n), dh(static_cast<std::size_t>(n) * n, 0.0), dv(static_cast<std::size_t>(n) * n, 0.0)
    {
    }
    std::size_t size() const { return dh.size(); }
};

/// IRL1 weights, one per pixel.
struct WeightMap {
    std::vector<double> w;

    static WeightMap ones(std::size_t n) { return {std::vector<double>(n, 1.0)}; }
    std::size_t size() const { return w.size(); }
};

namespace detail {

inline void grad_into(int n, std::span<const double> x, std::span<double> dh, std::span<double> dv)
{
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * n + c;
            dh[i] = c + 1 < n ? x[i + 1] - x[i] : 0.0;
            dv[i] = r + 1 < n ? x[i + n] - x[i] : 0.0;
        }
}

inline void grad_adjoint_into(int n, std::span<const double> dh, std::span<const double> dv, std::span<double> out)
{
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * n + c;
            double s = 0.0;
            if (c + 1 < n)
                s -= dh[i];
            if (c > 0)
                s += dh[i - 1];
            if (r + 1 < n)
                s -= dv[i];
            if (r > 0)
                s += dv[i - n];
            out[i] = s;
        }
}

inline int side_of(std::size_t n)
{
    const auto s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    require_dims(static_cast<std::size_t>(s) * s == n, "vector length is not a square image size");
    return s;
}

} // namespace detail

inline GradientField grad(const Image& x)
{
    GradientField g(x.side);
    detail::grad_into(x.side, x.span(), g.dh, g.dv);
    return g;
}

inline Image grad_adjoint(const GradientField& g)
{
    detail::require_dims(g.dh.size() == g.dv.size() && g.dh.size() == static_cast<std::size_t>(g.side) * g.side,
                         "grad_adjoint: malformed gradient field");
    Image out(g.side);
    detail::grad_adjoint_into(g.side, g.dh, g.dv, out.span());
    return out;
}

inline Image grad_magnitude(const GradientField& g)
{
    Image m(g.side);
    for (std::size_t i = 0; i < m.size(); ++i)
        m.data[i] = std::hypot(g.dh[i], g.dv[i]);
    return m;
}

/// D as a linear operator from n pixels to 2n values laid out [dh; dv].
class GradientOperator {
public:
    explicit GradientOperator(int side) : side_(side) {}

    std::size_t rows() const { return 2 * cols(); }
    std::size_t cols() const { return static_cast<std::size_t>(side_) * side_; }

    void apply(std::span<const double> x, std::span<double> out) const
    {
        detail::require_dims(x.size() == cols() && out.size() == rows(), "gradient apply: size mismatch");
        detail::grad_into(side_, x, out.first(cols()), out.subspan(cols()));
    }

    void adjoint(std::span<const double> g, std::span<double> out) const
    {
        detail::require_dims(g.size() == rows() && out.size() == cols(), "gradient adjoint: size mismatch");
        detail::grad_adjoint_into(side_, g.first(cols()), g.subspan(cols()), out);
    }

private:
    int side_;
};

/// sum_i |Dx|_i^p ; p = 1 is isotropic TV.
inline double tpv_value(const Image& x, double p)
{
    detail::require_domain(p > 0.0 && p <= 1.0, "tpv_value: p must lie in (0, 1]");
    const GradientField g = grad(x);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double m = std::hypot(g.dh[i], g.dv[i]);
        s += p == 1.0 ? m : std::pow(m, p);
    }
    return s;
}

/// Differentiable TV: sum_i sqrt(dh_i^2 + dv_i^2 + beta^2).
inline double tv_beta_value(const Image& x, double beta)
{
    detail::require_domain(beta > 0.0, "tv_beta_value: beta must be positive");
    const GradientField g = grad(x);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        s += std::sqrt(g.dh[i] * g.dh[i] + g.dv[i] * g.dv[i] + beta * beta);
    return s;
}

inline Image tv_beta_gradient(const Image& x, double beta)
{
    detail::require_domain(beta > 0.0, "tv_beta_gradient: beta must be positive");
    GradientField g = grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double psi = std::sqrt(g.dh[i] * g.dh[i] + g.dv[i] * g.dv[i] + beta * beta);
        g.dh[i] /= psi;
        g.dv[i] /= psi;
    }
    return grad_adjoint(g);
}

/// w_i = (sqrt(eta^2 + |Dx|_i^2) / eta)^(p - 1). Values lie in (0, 1].
inline WeightMap reweight(const Image& x, double p, double eta)
{
    detail::require_domain(p > 0.0 && p <= 1.0, "reweight: p must lie in (0, 1]");
    detail::require_domain(eta > 0.0, "reweight: eta must be positive");
    const GradientField g = grad(x);
    WeightMap w{std::vector<double>(g.size())};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double base = std::sqrt(eta * eta + g.dh[i] * g.dh[i] + g.dv[i] * g.dv[i]) / eta;
        w.w[i] = std::pow(base, p - 1.0);
    }
    return w;
}

/// Smoothing parameter used when the configuration leaves eta unset:
/// 1e-2 of the iterate's dynamic range, never below 1e-6.
inline double default_eta(const Image& x)
{
    const double range = vec::max_value(x.span()) - vec::min_value(x.span());
    return std::max(1e-2 * range, 1e-6);
}

/// psi(s) = eta^(1-p) * integral_0^s (eta^2 + u^2)^((p-1)/2) du.
///
/// Concave in s >= 0 with psi'(s) equal to the IRL1 weight, so replacing psi by
/// its tangent at the current |Dx| gives exactly the weighted-TV subproblem.
/// psi(s) ~ s for s << eta and ~ eta^(1-p) s^p / p for s >> eta; p = 1 gives s.
inline double tpv_potential(double s, double p, double eta)
{
    if (p == 1.0)
        return s;
    // u = eta sinh(v) turns the integral into eta * integral_0^V cosh(v)^p dv.
    static constexpr double nodes[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                        0.9602898564975363};
    static constexpr double weights[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                          0.1012285362903763};
    const double V = std::asinh(s / eta);
    const int segments = std::max(1, static_cast<int>(std::ceil(V / 0.25)));
    const double h = V / segments;
    double total = 0.0;
    for (int k = 0; k < segments; ++k) {
        const double mid = (k + 0.5) * h;
        for (int j = 0; j < 4; ++j)
            for (double sgn : {-1.0, 1.0})
                total += weights[j] * std::pow(std::cosh(mid + sgn * 0.5 * h * nodes[j]), p);
    }
    return eta * 0.5 * h * total;
}

/// Smoothed TpV: sum_i tpv_potential(|Dx|_i, p, eta).
inline double smoothed_tpv_value(const Image& x, double p, double eta)
{
    detail::require_domain(p > 0.0 && p <= 1.0, "smoothed_tpv_value: p must lie in (0, 1]");
    detail::require_domain(eta > 0.0, "smoothed_tpv_value: eta must be positive");
    const GradientField g = grad(x);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        s += tpv_potential(std::hypot(g.dh[i], g.dv[i]), p, eta);
    return s;
}

} // namespace dgct
