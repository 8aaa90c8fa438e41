#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <dgct/analytic.hpp>
#include <dgct/metrics.hpp>
#include <dgct/phantom.hpp>
#include <dgct/simulate.hpp>

#include "test_support.hpp"

using namespace dgct;
using namespace dgct::testing;

namespace {

// Ram-Lak taps written out again, independent of the library helper.
double ramlak_tap(int m, double d)
{
    if (m == 0)
        return 1.0 / (4.0 * d * d);
    if (std::abs(m) % 2 == 0)
        return 0.0;
    return -1.0 / (M_PI * M_PI * m * m * d * d);
}

std::vector<double> direct_convolution(const std::vector<double>& row, double d)
{
    const int n = static_cast<int>(row.size());
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out[i] += d * ramlak_tap(i - j, d) * row[j];
    return out;
}

} // namespace

TEST(RampFilter, ZeroRowGivesZero)
{
    const RampFilter f(40, 0.5);
    std::vector<double> row(40, 0.0), out(40, 1.0);
    f.filter(row, out);
    for (double v : out)
        EXPECT_EQ(v, 0.0);
}

TEST(RampFilter, ImpulseMatchesDirectConvolution)
{
    for (double d : {1.0, 0.5, 1.7})
        for (int n : {16, 37, 128}) {
            const RampFilter f(n, d);
            for (int j : {0, n / 2, n - 1}) {
                std::vector<double> row(n, 0.0), out(n);
                row[j] = 1.0;
                f.filter(row, out);
                EXPECT_LT(max_abs_diff(out, direct_convolution(row, d)), 1e-8) << "n " << n << " d " << d;
            }
        }
}

TEST(RampFilter, RandomRowMatchesDirectConvolution)
{
    const int n = 100;
    const RampFilter f(n, 0.8);
    const auto row = random_vector(n, 3);
    std::vector<double> out(n);
    f.filter(row, out);
    EXPECT_LT(max_abs_diff(out, direct_convolution(row, 0.8)), 1e-8);
}

// The infinite kernel sums to zero; truncation at |m| < P/2 leaves the odd tail
// (2 / (pi^2 d)) sum_{odd m > P/2} 1/m^2 as DC gain.
TEST(RampFilter, DcGainIsTheTruncatedKernelTail)
{
    for (int n : {8, 32, 128}) {
        const double d = 0.75;
        const RampFilter f(n, d);
        const int P = f.padded_length();
        const double M = P / 2 + 1;
        const double lo = 2.0 / (M_PI * M_PI * d) * (1.0 / (2.0 * M));
        const double hi = 2.0 / (M_PI * M_PI * d) * (1.0 / (2.0 * M) + 1.0 / (M * M));
        EXPECT_GT(f.response()[0], lo);
        EXPECT_LT(f.response()[0], hi);

        std::vector<double> ones(n, 1.0), full(P);
        f.filter_padded(ones, full);
        double sum = 0.0;
        for (double v : full)
            sum += v;
        EXPECT_NEAR(sum, f.response()[0] * n, 1e-10);
    }
}

TEST(RampFilter, HannWindowAttenuates)
{
    const RampFilter plain(64, 1.0), hann(64, 1.0, RampWindow::hann);
    const auto a = plain.response(), b = hann.response();
    ASSERT_EQ(a.size(), b.size());
    EXPECT_DOUBLE_EQ(a[0], b[0]);
    EXPECT_NEAR(b.back(), 0.0, 1e-15);
    for (std::size_t k = 0; k < a.size(); ++k)
        EXPECT_LE(b[k], a[k] + 1e-15);
}

TEST(RampFilter, PaddingIsPowerOfTwoAtLeastTwiceTheLength)
{
    EXPECT_EQ(RampFilter(64, 1.0).padded_length(), 128);
    EXPECT_EQ(RampFilter(65, 1.0).padded_length(), 256);
    EXPECT_EQ(RampFilter(1, 1.0).padded_length(), 2);
    EXPECT_THROW(RampFilter(0, 1.0), DimensionError);
    EXPECT_THROW(RampFilter(8, 0.0), DomainError);
}

TEST(Fbp, DenseViewDiskIsAccurate)
{
    const Image gt = disk_phantom(64, 0.3, 1.0);
    const auto g = build_geometry(64, 360, 360);
    const Image x = fbp_reconstruct(g, forward_project(g, gt));
    EXPECT_GE(ssim(x, gt), 85.0);
    EXPECT_LT(relative_error(x, gt), 0.15);
}

TEST(Fbp, DegradesAsViewsAreRemoved)
{
    const Image gt = disk_phantom(64, 0.3, 1.0);
    double previous = 101.0, dense = 0.0;
    for (int views : {360, 180, 120, 60, 30}) {
        const auto g = build_geometry(64, views, 360);
        const double s = ssim(fbp_reconstruct(g, forward_project(g, gt)), gt);
        EXPECT_LE(s, previous) << views << " views";
        previous = s;
        if (views == 360)
            dense = s;
    }
    EXPECT_LT(previous, dense);
}

TEST(Fbp, ZeroSinogramGivesZeroImage)
{
    const auto g = build_geometry(32, 30, 180);
    const Image x = fbp_reconstruct(g, Sinogram(g.n_angles, g.n_det));
    for (double v : x.data)
        EXPECT_EQ(v, 0.0);
}

TEST(Fbp, IsLinear)
{
    const auto g = build_geometry(24, 20, 180);
    Sinogram y1(g.n_angles, g.n_det), y2(g.n_angles, g.n_det), mix(g.n_angles, g.n_det);
    y1.data = random_vector(y1.size(), 11);
    y2.data = random_vector(y2.size(), 12);
    for (std::size_t i = 0; i < mix.size(); ++i)
        mix.data[i] = 2.5 * y1.data[i] - 0.75 * y2.data[i];
    for (auto w : {RampWindow::ramlak, RampWindow::hann}) {
        const Image a = fbp_reconstruct(g, y1, w), b = fbp_reconstruct(g, y2, w), c = fbp_reconstruct(g, mix, w);
        for (std::size_t i = 0; i < c.size(); ++i)
            EXPECT_NEAR(c.data[i], 2.5 * a.data[i] - 0.75 * b.data[i], 1e-10);
    }
}

TEST(Fbp, NegativeValuesAreKept)
{
    const Image gt = disk_phantom(64, 0.3, 1.0);
    const auto g = build_geometry(64, 30, 180);
    const Image x = fbp_reconstruct(g, forward_project(g, gt));
    EXPECT_LT(*std::min_element(x.data.begin(), x.data.end()), 0.0);
}

TEST(Fbp, PixelsOutsideTheFieldOfViewAreZero)
{
    const auto g = build_geometry(64, 90, 360);
    Sinogram y(g.n_angles, g.n_det, 1.0);
    const Image x = fbp_reconstruct(g, y);
    EXPECT_EQ(x(0, 0), 0.0);
    EXPECT_EQ(x(63, 63), 0.0);
    EXPECT_NE(x(32, 32), 0.0);
}

TEST(Fbp, SizeMismatchThrows)
{
    const auto g = build_geometry(16, 10, 180);
    EXPECT_THROW(fbp_reconstruct(g, Sinogram(11, g.n_det)), DimensionError);
}
