#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "error.hpp"
#include "image.hpp"

namespace dgct {

/// A real matrix applied matrix-free. `apply` writes Kx into `out` (size rows()),
/// `adjoint` writes K^T y into `out` (size cols()). Both overwrite their output.
template <class Op>
concept LinearOperator = requires(const Op& op, std::span<const double> in, std::span<double> out) {
    { op.rows() } -> std::convertible_to<std::size_t>;
    { op.cols() } -> std::convertible_to<std::size_t>;
    op.apply(in, out);
    op.adjoint(in, out);
};

/// Row-major dense matrix. Used for tiny problems and as a test oracle.
class DenseMatrixOperator {
public:
    DenseMatrixOperator(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), a_(std::move(values))
    {
        detail::require_dims(a_.size() == rows_ * cols_, "dense matrix: value count != rows*cols");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
    const std::vector<double>& values() const { return a_; }

    void apply(std::span<const double> x, std::span<double> out) const
    {
        detail::require_dims(x.size() == cols_ && out.size() == rows_, "dense apply: size mismatch");
        for (std::size_t r = 0; r < rows_; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < cols_; ++c)
                s += a_[r * cols_ + c] * x[c];
            out[r] = s;
        }
    }

    void adjoint(std::span<const double> y, std::span<double> out) const
    {
        detail::require_dims(y.size() == rows_ && out.size() == cols_, "dense adjoint: size mismatch");
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                out[c] += a_[r * cols_ + c] * y[r];
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> a_;
};

namespace detail {

/// Power iteration on a symmetric positive semidefinite map v -> K^T K v.
/// Returns sqrt of the dominant eigenvalue, i.e. the spectral norm of K.
template <class NormalMap>
double power_method(std::size_t n, NormalMap&& normal, int iterations, std::uint64_t seed)
{
    detail::require_domain(iterations >= 1, "power method: iterations must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(n), w(n);
    for (double& e : v)
        e = gauss(rng);
    double nv = vec::norm2(v);
    if (nv == 0.0)
        return 0.0;
    for (double& e : v)
        e /= nv;

    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        normal(std::span<const double>(v), std::span<double>(w));
        const double nw = vec::norm2(w);
        estimate = std::sqrt(nw);
        if (nw == 0.0)
            break;
        for (std::size_t i = 0; i < n; ++i)
            v[i] = w[i] / nw;
    }
    return estimate;
}

} // namespace detail
} // namespace dgct
