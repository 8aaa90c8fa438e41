#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <fftw3.h>

#include "error.hpp"
#include "geometry.hpp"
#include "image.hpp"
#include "wavelet.hpp"

namespace dgct {

enum class RampWindow { ramlak, hann };

/// Band-limited spatial ramp kernel (Ram-Lak) at tap m for detector spacing d:
/// 1/(4d^2) at 0, -1/(pi^2 m^2 d^2) at odd m, 0 at even m.
inline double ramp_kernel(int m, double d)
{
    if (m == 0)
        return 0.25 / (d * d);
    if (m % 2 == 0)
        return 0.0;
    return -1.0 / (std::numbers::pi * std::numbers::pi * double(m) * double(m) * d * d);
}

/// Ramp filtering of detector rows through the FFT.
///
/// Rows are zero-padded to P, the next power of two >= 2 * length, and
/// circularly convolved with d * ramp_kernel over the taps |m| < P/2, so the
/// first `length` outputs equal the linear convolution. The response is the
/// DFT of that kernel, optionally times a Hann window. Sampling |f| directly
/// instead gives a zero DC bin but biases the reconstructed level by a few
/// percent. The kernel's DC gain is the truncated tail sum, O(1/P).
class RampFilter {
public:
    RampFilter(int length, double spacing, RampWindow window = RampWindow::ramlak)
        : length_(length), padded_(detail::next_power_of_two(2 * length)), spacing_(spacing)
    {
        detail::require_dims(length >= 1, "ramp filter: length must be >= 1");
        detail::require_domain(spacing > 0.0, "ramp filter: spacing must be positive");
        const int half = padded_ / 2 + 1;
        buf_ = fftw_alloc_real(padded_);
        spec_ = fftw_alloc_complex(half);
        forward_ = fftw_plan_dft_r2c_1d(padded_, buf_, spec_, FFTW_ESTIMATE);
        inverse_ = fftw_plan_dft_c2r_1d(padded_, spec_, buf_, FFTW_ESTIMATE);
        if (!forward_ || !inverse_)
            throw NumericalError("ramp filter: FFTW planning failed");

        for (int i = 0; i < padded_; ++i)
            buf_[i] = spacing_ * ramp_kernel(i < padded_ / 2 ? i : i - padded_, spacing_);
        fftw_execute(forward_);
        response_.resize(half);
        for (int k = 0; k < half; ++k) {
            double h = spec_[k][0]; // even kernel: the spectrum is real
            if (window == RampWindow::hann)
                h *= 0.5 * (1.0 + std::cos(std::numbers::pi * k / (half - 1)));
            response_[k] = h;
        }
    }

    RampFilter(const RampFilter&) = delete;
    RampFilter& operator=(const RampFilter&) = delete;

    ~RampFilter()
    {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
        fftw_free(buf_);
        fftw_free(spec_);
    }

    int length() const { return length_; }
    int padded_length() const { return padded_; }
    std::span<const double> response() const { return response_; }

    /// Filters one row; writes the full padded convolution (size padded_length()).
    void filter_padded(std::span<const double> row, std::span<double> out) const
    {
        detail::require_dims(static_cast<int>(row.size()) == length_ && static_cast<int>(out.size()) == padded_,
                             "ramp filter: row size mismatch");
        std::fill(buf_, buf_ + padded_, 0.0);
        std::copy(row.begin(), row.end(), buf_);
        fftw_execute(forward_);
        const int half = padded_ / 2 + 1;
        for (int k = 0; k < half; ++k) {
            spec_[k][0] *= response_[k];
            spec_[k][1] *= response_[k];
        }
        fftw_execute(inverse_);
        for (int i = 0; i < padded_; ++i)
            out[i] = buf_[i] / padded_; // FFTW's inverse is unnormalised
    }

    void filter(std::span<const double> row, std::span<double> out) const
    {
        detail::require_dims(static_cast<int>(out.size()) == length_, "ramp filter: output size mismatch");
        std::vector<double> full(padded_);
        filter_padded(row, full);
        std::copy(full.begin(), full.begin() + length_, out.begin());
    }

private:
    int length_;
    int padded_;
    double spacing_;
    std::vector<double> response_;
    double* buf_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

/// Ramp-filters every row of a sinogram (detector spacing from the geometry).
inline Sinogram ramp_filter(const Sinogram& y, double spacing, RampWindow window = RampWindow::ramlak)
{
    const RampFilter f(y.n_det, spacing, window);
    Sinogram out(y.n_angles, y.n_det);
    for (int a = 0; a < y.n_angles; ++a)
        f.filter(y.row(a), out.row(a));
    return out;
}

/// Filtered back projection for the flat fan-beam geometry.
///
/// Data are rescaled to a virtual detector through the rotation centre,
/// cosine weighted, ramp filtered and back projected with the 1/U^2 distance
/// weight and linear interpolation between bins. The angular integral is
/// normalised by pi / range, so full and half scans share one formula (a
/// half scan without redundancy weighting is only approximate). Pixels that
/// fall off the detector in some view are outside the field of view and are
/// returned as 0.
inline Image fbp_reconstruct(const FanBeamGeometry& g, const Sinogram& y, RampWindow window = RampWindow::ramlak)
{
    g.validate();
    detail::require_dims(y.n_angles == g.n_angles && y.n_det == g.n_det, "fbp: sinogram/geometry mismatch");
    const double so = g.source_to_center;
    const double mag = so / g.source_to_detector();
    const double du = g.det_pixel_size * mag;

    Sinogram weighted(y.n_angles, y.n_det);
    for (int a = 0; a < y.n_angles; ++a)
        for (int d = 0; d < y.n_det; ++d) {
            const double u = g.bin_offset(d) * mag;
            weighted.row(a)[d] = y.row(a)[d] * so / std::sqrt(so * so + u * u);
        }
    const Sinogram q = ramp_filter(weighted, du, window);

    const int n = g.image_side;
    const double range = g.angular_range * std::numbers::pi / 180.0;
    const double dbeta = range / g.n_angles;
    const double u0 = g.bin_offset(0) * mag;
    Image x(n);
    std::vector<char> outside(x.size(), 0);
    for (int a = 0; a < g.n_angles; ++a) {
        const double b = g.angle(a);
        const double cb = std::cos(b), sb = std::sin(b);
        const auto row = q.row(a);
        for (int r = 0; r < n; ++r) {
            const double py = r + 0.5 - 0.5 * n;
            for (int c = 0; c < n; ++c) {
                const double px = c + 0.5 - 0.5 * n;
                const double along = so - (px * cb + py * sb);
                const double t = -px * sb + py * cb;
                const double u = so * t / along;
                const double U = along / so;
                const double pos = (u - u0) / du;
                const int i0 = static_cast<int>(std::floor(pos));
                if (i0 < 0 || i0 + 1 >= g.n_det) {
                    outside[static_cast<std::size_t>(r) * n + c] = 1;
                    continue;
                }
                const double f = pos - i0;
                const double v = (1.0 - f) * row[i0] + f * row[i0 + 1];
                x(r, c) += v / (U * U);
            }
        }
    }
    const double scale = dbeta * std::numbers::pi / range;
    for (std::size_t i = 0; i < x.size(); ++i)
        x.data[i] = outside[i] ? 0.0 : x.data[i] * scale;
    return x;
}

} // namespace dgct
