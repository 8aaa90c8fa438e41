#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "../geometry.hpp"
#include "../image.hpp"
#include "../linear_operator.hpp"
#include "../wavelet.hpp"
#include "../operator_norm.hpp"
#include "config.hpp"
#include "irl1.hpp"
#include "prox.hpp"

namespace dgct {

/// W^T: Haar coefficients on the padded power-of-two grid to a cropped image.
/// The adjoint zero-pads and runs the forward transform.
class WaveletSynthesisOperator {
public:
    WaveletSynthesisOperator(int image_side, int levels)
        : image_side_(image_side), side_(detail::next_power_of_two(image_side)), levels_(levels)
    {
        detail::require_dims(image_side >= 1, "wavelet operator: bad image side");
        detail::require_dims(levels >= 1 && levels <= detail::log2_exact(side_),
                             "wavelet operator: levels must lie in [1, log2(padded side)]");
    }

    std::size_t rows() const { return static_cast<std::size_t>(image_side_) * image_side_; }
    std::size_t cols() const { return static_cast<std::size_t>(side_) * side_; }
    int padded_side() const { return side_; }

    void apply(std::span<const double> c, std::span<double> out) const
    {
        detail::require_dims(c.size() == cols() && out.size() == rows(), "wavelet synthesis: size mismatch");
        std::vector<double> a(c.begin(), c.end()), tmp;
        for (int l = levels_ - 1; l >= 0; --l)
            detail::haar_inverse_block(a, side_, side_ >> l, tmp);
        for (int r = 0; r < image_side_; ++r)
            for (int col = 0; col < image_side_; ++col)
                out[static_cast<std::size_t>(r) * image_side_ + col] = a[static_cast<std::size_t>(r) * side_ + col];
    }

    void adjoint(std::span<const double> x, std::span<double> out) const
    {
        detail::require_dims(x.size() == rows() && out.size() == cols(), "wavelet analysis: size mismatch");
        std::vector<double> a(cols(), 0.0), tmp;
        for (int r = 0; r < image_side_; ++r)
            for (int col = 0; col < image_side_; ++col)
                a[static_cast<std::size_t>(r) * side_ + col] = x[static_cast<std::size_t>(r) * image_side_ + col];
        for (int l = 0, s = side_; l < levels_; ++l, s /= 2)
            detail::haar_forward_block(a, side_, s, tmp);
        std::copy(a.begin(), a.end(), out.begin());
    }

private:
    int image_side_;
    int side_;
    int levels_;
};

/// A composed with the wavelet synthesis: c -> A W^T c.
template <LinearOperator Op>
class SynthesisComposed {
public:
    SynthesisComposed(const Op& A, const WaveletSynthesisOperator& W) : A_(A), W_(W), tmp_(W.rows()) {}

    std::size_t rows() const { return A_.rows(); }
    std::size_t cols() const { return W_.cols(); }

    void apply(std::span<const double> c, std::span<double> out) const
    {
        W_.apply(c, tmp_);
        A_.apply(tmp_, out);
    }

    void adjoint(std::span<const double> y, std::span<double> out) const
    {
        A_.adjoint(y, tmp_);
        W_.adjoint(tmp_, out);
    }

private:
    const Op& A_;
    const WaveletSynthesisOperator& W_;
    mutable std::vector<double> tmp_;
};

/// FISTA on  min_c ||A W^T c - y||^2 + lambda ||c||_1  with Haar W; the
/// reconstruction is max(W^T c, 0). cfg.operator_norm, when set, is taken as
/// ||A|| and bounds the Lipschitz constant 2 ||A W^T||^2.
template <LinearOperator Op>
SolveResult fista_wavelet_solve(const Op& A, std::span<const double> y, const Image& x0, const SolverConfig& cfg)
{
    cfg.validate();
    detail::require_dims(y.size() == A.rows(), "fista_wavelet_solve: data size does not match operator");
    detail::require_dims(x0.size() == A.cols(), "fista_wavelet_solve: image does not match operator");

    detail::Stopwatch clock;
    const WaveletSynthesisOperator W(x0.side, cfg.wavelet_levels);
    const SynthesisComposed<Op> M(A, W);
    const double norm = cfg.operator_norm > 0.0
                            ? cfg.operator_norm
                            : detail::power_method(
                                  M.cols(),
                                  [&](std::span<const double> v, std::span<double> out) {
                                      std::vector<double> t(M.rows());
                                      M.apply(v, t);
                                      M.adjoint(t, out);
                                  },
                                  cfg.power_iterations, kPowerMethodSeed);
    detail::require_domain(norm > 0.0, "fista_wavelet_solve: operator is zero");
    // The power method approaches ||A W^T|| from below; keep a small margin.
    const double L = 2.0 * (1.02 * norm) * (1.02 * norm);
    const double thresh = cfg.lambda / L;

    SolverReport rep;
    rep.method = "w-fista";
    const std::size_t m = M.cols();
    std::vector<double> c(m), c_new(m), z(m), grad(m), mz(M.rows()), mc(M.rows()), mc_new(M.rows()), res(M.rows());
    W.adjoint(x0.span(), c);
    z = c;
    M.apply(c, mc);
    mz = mc;
    double t = 1.0;

    for (int k = 0; k < cfg.max_total_iters; ++k) {
        for (std::size_t i = 0; i < res.size(); ++i)
            res[i] = mz[i] - y[i];
        M.adjoint(res, grad);
        for (std::size_t i = 0; i < m; ++i)
            z[i] -= 2.0 * grad[i] / L;
        c_new = soft_threshold(z, thresh);

        M.apply(c_new, mc_new);
        double fit = 0.0, l1 = 0.0;
        for (std::size_t i = 0; i < mc_new.size(); ++i)
            fit += (mc_new[i] - y[i]) * (mc_new[i] - y[i]);
        for (double v : c_new)
            l1 += std::abs(v);
        const double objective = fit + cfg.lambda * l1;
        if (!std::isfinite(objective))
            throw NumericalError("fista_wavelet_solve: non-finite objective at iteration " + std::to_string(k));

        const double dist = vec::distance(c_new, c);
        const double threshold = detail::stop_threshold(cfg, vec::norm2(c));

        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double mom = (t - 1.0) / t_new;
        for (std::size_t i = 0; i < m; ++i)
            z[i] = c_new[i] + mom * (c_new[i] - c[i]);
        for (std::size_t i = 0; i < mz.size(); ++i)
            mz[i] = mc_new[i] + mom * (mc_new[i] - mc[i]);
        std::swap(c, c_new);
        std::swap(mc, mc_new);
        t = t_new;

        rep.objective_trace.push_back(objective);
        rep.iterate_distance_trace.push_back(dist);
        ++rep.iterations_used;
        if (dist < threshold) {
            rep.stop_reason = StopReason::tolerance;
            break;
        }
    }

    Image x(x0.side);
    W.apply(c, x.span());
    vec::project_nonnegative(x.span());
    rep.wall_time = clock.seconds();
    return {std::move(x), std::move(rep)};
}

inline SolveResult fista_wavelet_solve(const FanBeamGeometry& g, const Sinogram& y, const Image& x0,
                                       const SolverConfig& cfg)
{
    detail::require_dims(y.n_angles == g.n_angles && y.n_det == g.n_det,
                         "fista_wavelet_solve: sinogram/geometry mismatch");
    return fista_wavelet_solve(FanBeamProjector(g), y.span(), x0, cfg);
}

} // namespace dgct
