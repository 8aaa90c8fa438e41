#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "image.hpp"

namespace dgct {

/// Multilevel 2-D Haar coefficients in the usual in-place layout: after each
/// level the top-left quadrant of the current block holds the approximation
/// and the remaining three quadrants hold the details.
struct WaveletCoeffs {
    int side = 0;       ///< power of two
    int levels = 0;
    int image_side = 0; ///< side of the image before padding (== side when no padding)
    std::vector<double> c;
};

namespace detail {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int next_power_of_two(int n)
{
    int p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

inline int log2_exact(int n)
{
    int l = 0;
    while ((1 << l) < n)
        ++l;
    return l;
}

// One orthonormal Haar level on the top-left s x s block of a side x side array.
inline void haar_forward_block(std::vector<double>& a, int side, int s, std::vector<double>& tmp)
{
    const double k = 1.0 / std::numbers::sqrt2;
    const int h = s / 2;
    tmp.resize(s);
    for (int r = 0; r < s; ++r) {
        double* row = a.data() + static_cast<std::size_t>(r) * side;
        for (int j = 0; j < h; ++j) {
            tmp[j] = (row[2 * j] + row[2 * j + 1]) * k;
            tmp[h + j] = (row[2 * j] - row[2 * j + 1]) * k;
        }
        std::copy(tmp.begin(), tmp.begin() + s, row);
    }
    for (int c = 0; c < s; ++c) {
        for (int j = 0; j < h; ++j) {
            const double u = a[static_cast<std::size_t>(2 * j) * side + c];
            const double v = a[static_cast<std::size_t>(2 * j + 1) * side + c];
            tmp[j] = (u + v) * k;
            tmp[h + j] = (u - v) * k;
        }
        for (int r = 0; r < s; ++r)
            a[static_cast<std::size_t>(r) * side + c] = tmp[r];
    }
}

inline void haar_inverse_block(std::vector<double>& a, int side, int s, std::vector<double>& tmp)
{
    const double k = 1.0 / std::numbers::sqrt2;
    const int h = s / 2;
    tmp.resize(s);
    for (int c = 0; c < s; ++c) {
        for (int j = 0; j < h; ++j) {
            const double lo = a[static_cast<std::size_t>(j) * side + c];
            const double hi = a[static_cast<std::size_t>(h + j) * side + c];
            tmp[2 * j] = (lo + hi) * k;
            tmp[2 * j + 1] = (lo - hi) * k;
        }
        for (int r = 0; r < s; ++r)
            a[static_cast<std::size_t>(r) * side + c] = tmp[r];
    }
    for (int r = 0; r < s; ++r) {
        double* row = a.data() + static_cast<std::size_t>(r) * side;
        for (int j = 0; j < h; ++j) {
            tmp[2 * j] = (row[j] + row[h + j]) * k;
            tmp[2 * j + 1] = (row[j] - row[h + j]) * k;
        }
        std::copy(tmp.begin(), tmp.begin() + s, row);
    }
}

// Whole-sample symmetric extension index.
inline int reflect_index(int i, int n)
{
    if (n == 1)
        return 0;
    const int period = 2 * n;
    i %= period;
    if (i < 0)
        i += period;
    return i < n ? i : period - 1 - i;
}

} // namespace detail

/// Orthonormal Haar analysis. Images whose side is not a power of two are
/// symmetrically padded to the next power of two first.
inline WaveletCoeffs wavelet_analysis(const Image& x, int levels)
{
    const int side = detail::next_power_of_two(x.side);
    detail::require_dims(levels >= 1 && levels <= detail::log2_exact(side),
                         "wavelet_analysis: levels must lie in [1, log2(side)]");
    WaveletCoeffs w{side, levels, x.side, std::vector<double>(static_cast<std::size_t>(side) * side)};
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c)
            w.c[static_cast<std::size_t>(r) * side + c] =
                x(detail::reflect_index(r, x.side), detail::reflect_index(c, x.side));
    std::vector<double> tmp;
    for (int l = 0, s = side; l < levels; ++l, s /= 2)
        detail::haar_forward_block(w.c, side, s, tmp);
    return w;
}

/// Exact inverse of wavelet_analysis (crops any padding).
inline Image wavelet_synthesis(const WaveletCoeffs& w)
{
    detail::require_dims(detail::is_power_of_two(w.side) && w.c.size() == static_cast<std::size_t>(w.side) * w.side,
                         "wavelet_synthesis: malformed coefficients");
    detail::require_dims(w.levels >= 1 && w.levels <= detail::log2_exact(w.side) && w.image_side <= w.side,
                         "wavelet_synthesis: bad level count");
    std::vector<double> a = w.c;
    std::vector<double> tmp;
    for (int l = w.levels - 1; l >= 0; --l)
        detail::haar_inverse_block(a, w.side, w.side >> l, tmp);
    Image x(w.image_side);
    for (int r = 0; r < w.image_side; ++r)
        for (int c = 0; c < w.image_side; ++c)
            x(r, c) = a[static_cast<std::size_t>(r) * w.side + c];
    return x;
}

} // namespace dgct
