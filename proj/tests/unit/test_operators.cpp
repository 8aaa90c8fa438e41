#include <gtest/gtest.h>

#include <dgct/operators.hpp>
#include <dgct/wavelet.hpp>

#include "test_support.hpp"

using namespace dgct;
using namespace dgct::testing;

TEST(Grad, ConstantImageHasZeroField)
{
    const GradientField g = grad(Image(6, 0.7));
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_EQ(g.dh[i], 0.0);
        EXPECT_EQ(g.dv[i], 0.0);
    }
}

TEST(Grad, VerticalStepShowsOnlyInHorizontalDifferences)
{
    Image x(6);
    for (int r = 0; r < 6; ++r)
        for (int c = 3; c < 6; ++c)
            x(r, c) = 0.25;
    const GradientField g = grad(x);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) {
            EXPECT_EQ(g.dh[r * 6 + c], c == 2 ? 0.25 : 0.0);
            EXPECT_EQ(g.dv[r * 6 + c], 0.0);
        }
}

TEST(Grad, MatchesDenseDifferenceMatrices)
{
    const int n = 6;
    const Image x = random_image(n, 5);
    const auto m = dense_gradient_matrix(n);
    const auto expected = matvec(m, 2 * n * n, n * n, x.data);
    const GradientField g = grad(x);
    std::vector<double> got(g.dh);
    got.insert(got.end(), g.dv.begin(), g.dv.end());
    EXPECT_LE(max_abs_diff(got, expected), 1e-12);
}

TEST(GradAdjoint, ZeroFieldGivesZeroImage)
{
    const Image x = grad_adjoint(GradientField(5));
    for (double v : x.data)
        EXPECT_EQ(v, 0.0);
}

TEST(GradAdjoint, PassesDotProductTest)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        const int n = 6;
        const Image x = random_image(n, s, -1, 1);
        GradientField g(n);
        g.dh = random_vector(n * n, 100 + s);
        g.dv = random_vector(n * n, 200 + s);
        const GradientField dx = grad(x);
        const double lhs = vec::dot(dx.dh, g.dh) + vec::dot(dx.dv, g.dv);
        const double rhs = vec::dot(x.data, grad_adjoint(g).data);
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(GradAdjoint, OfConstantGradientIsZero)
{
    const Image z = grad_adjoint(grad(Image(7, 3.0)));
    for (double v : z.data)
        EXPECT_EQ(v, 0.0);
}

TEST(GradientOperator, StackedLayoutMatchesFreeFunctions)
{
    const Image x = random_image(5, 9);
    const GradientOperator D(5);
    std::vector<double> out(D.rows());
    D.apply(x.data, out);
    const GradientField g = grad(x);
    for (std::size_t i = 0; i < 25; ++i) {
        EXPECT_EQ(out[i], g.dh[i]);
        EXPECT_EQ(out[25 + i], g.dv[i]);
    }
}

TEST(GradMagnitude, PythagoreanPerPixel)
{
    GradientField g(3);
    g.dh[4] = 3.0;
    g.dv[4] = 4.0;
    const Image m = grad_magnitude(g);
    EXPECT_DOUBLE_EQ(m.data[4], 5.0);
    EXPECT_EQ(grad_magnitude(GradientField(3)).data, Image(3).data);

    GradientField r(6);
    r.dh = random_vector(36, 1);
    r.dv = random_vector(36, 2);
    const Image mr = grad_magnitude(r);
    for (std::size_t i = 0; i < 36; ++i)
        EXPECT_NEAR(mr.data[i], std::sqrt(r.dh[i] * r.dh[i] + r.dv[i] * r.dv[i]), 1e-15);
}

TEST(TpvValue, ZeroOnConstantImages)
{
    EXPECT_EQ(tpv_value(Image(8, 0.4), 0.5), 0.0);
    EXPECT_EQ(tpv_value(Image(8, 0.4), 1.0), 0.0);
}

TEST(TpvValue, UnitStepCountsCrossedPixels)
{
    Image x(5);
    for (int r = 0; r < 5; ++r)
        for (int c = 2; c < 5; ++c)
            x(r, c) = 1.0;
    EXPECT_DOUBLE_EQ(tpv_value(x, 1.0), 5.0);
}

TEST(TpvValue, MatchesDirectSummation)
{
    const int n = 6;
    const Image x = random_image(n, 11);
    double expected = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double h = c + 1 < n ? x(r, c + 1) - x(r, c) : 0.0;
            const double v = r + 1 < n ? x(r + 1, c) - x(r, c) : 0.0;
            expected += std::pow(h * h + v * v, 0.25);
        }
    EXPECT_NEAR(tpv_value(x, 0.5), expected, 1e-10);
}

TEST(TpvValue, PositivelyHomogeneousOfDegreeP)
{
    const Image x = random_image(8, 4);
    for (double p : {0.2, 0.5, 1.0})
        for (double alpha : {0.3, 2.0, 7.5}) {
            Image ax = x;
            for (double& v : ax.data)
                v *= alpha;
            EXPECT_NEAR(tpv_value(ax, p), std::pow(alpha, p) * tpv_value(x, p), 1e-10 * tpv_value(ax, p));
        }
}

TEST(TpvValue, RejectsPOutsideUnitInterval)
{
    EXPECT_THROW(tpv_value(Image(4), 0.0), DomainError);
    EXPECT_THROW(tpv_value(Image(4), 1.5), DomainError);
}

TEST(TvBeta, ConstantImageGivesNSquaredBeta)
{
    EXPECT_NEAR(tv_beta_value(Image(7, 0.3), 1e-3), 49e-3, 1e-15);
}

TEST(TvBeta, SmallBetaApproachesTv)
{
    const Image x = random_image(8, 12);
    const double beta = 1e-8;
    EXPECT_NEAR(tv_beta_value(x, beta), tpv_value(x, 1.0), beta * 64);
}

TEST(TvBeta, MatchesDirectSummation)
{
    const int n = 6;
    const Image x = random_image(n, 13);
    const double beta = 1e-3;
    double expected = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double h = c + 1 < n ? x(r, c + 1) - x(r, c) : 0.0;
            const double v = r + 1 < n ? x(r + 1, c) - x(r, c) : 0.0;
            expected += std::sqrt(h * h + v * v + beta * beta);
        }
    EXPECT_NEAR(tv_beta_value(x, beta), expected, 1e-10);
    EXPECT_THROW(tv_beta_value(x, 0.0), DomainError);
    EXPECT_THROW(tv_beta_gradient(x, -1.0), DomainError);
}

TEST(TvBetaGradient, ZeroOnConstantImage)
{
    for (double v : tv_beta_gradient(Image(6, 0.5), 1e-3).data)
        EXPECT_EQ(v, 0.0);
}

TEST(TvBetaGradient, MatchesCentralFiniteDifferences)
{
    for (int n : {6, 8}) {
        const double beta = 1e-3;
        const Image x = random_image(n, 21 + n);
        const Image g = tv_beta_gradient(x, beta);
        const double h = 1e-6;
        double worst = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            Image xp = x, xm = x;
            xp.data[i] += h;
            xm.data[i] -= h;
            const double fd = (tv_beta_value(xp, beta) - tv_beta_value(xm, beta)) / (2 * h);
            worst = std::max(worst, std::abs(fd - g.data[i]) / std::max(std::abs(fd), 1e-3));
        }
        EXPECT_LE(worst, n == 6 ? 1e-5 : 1e-4);
    }
}

TEST(TvBetaGradient, IsOdd)
{
    const Image x = random_image(6, 30, -1, 1);
    Image neg = x;
    for (double& v : neg.data)
        v = -v;
    const Image g = tv_beta_gradient(x, 1e-3), gn = tv_beta_gradient(neg, 1e-3);
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_DOUBLE_EQ(gn.data[i], -g.data[i]);
}

TEST(Reweight, FlatRegionsGetUnitWeight)
{
    const WeightMap w = reweight(Image(5, 0.3), 0.5, 0.01);
    for (double v : w.w)
        EXPECT_EQ(v, 1.0);
}

TEST(Reweight, KnownMagnitudeGivesKnownWeight)
{
    // |Dx| = eta * sqrt(3) at pixel 0 via a horizontal jump.
    const double eta = 0.02;
    Image x(3);
    x(0, 1) = eta * std::sqrt(3.0);
    x(0, 2) = x(0, 1);
    x(1, 0) = 0.0;
    const WeightMap w = reweight(x, 0.5, eta);
    // pixel 0 also has dv = x(1,0) - x(0,0) = 0
    EXPECT_NEAR(w.w[0], 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Reweight, MatchesElementwiseFormula)
{
    const int n = 6;
    const Image x = random_image(n, 31);
    const double p = 0.3, eta = 0.05;
    const WeightMap w = reweight(x, p, eta);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double h = c + 1 < n ? x(r, c + 1) - x(r, c) : 0.0;
            const double v = r + 1 < n ? x(r + 1, c) - x(r, c) : 0.0;
            const double expected = std::pow(std::sqrt(eta * eta + h * h + v * v) / eta, p - 1);
            EXPECT_NEAR(w.w[r * n + c], expected, 1e-12);
            EXPECT_GT(w.w[r * n + c], 0.0);
            EXPECT_LE(w.w[r * n + c], 1.0);
        }
}

TEST(Reweight, PEqualOneGivesUnitWeights)
{
    for (double v : reweight(random_image(6, 3), 1.0, 0.01).w)
        EXPECT_EQ(v, 1.0);
}

TEST(Reweight, RejectsBadParameters)
{
    EXPECT_THROW(reweight(Image(4), 0.0, 0.1), DomainError);
    EXPECT_THROW(reweight(Image(4), 0.5, 0.0), DomainError);
}

TEST(DefaultEta, ScalesWithRangeAndHasFloor)
{
    EXPECT_DOUBLE_EQ(default_eta(Image(4, 0.5)), 1e-6);
    Image x(4);
    x.data[3] = 2.0;
    EXPECT_DOUBLE_EQ(default_eta(x), 2e-2);
}

TEST(Wavelet, ConstantImageHasNoDetail)
{
    const int n = 16, levels = 3;
    const WaveletCoeffs w = wavelet_analysis(Image(n, 0.5), levels);
    const int coarse = n >> levels;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double v = w.c[r * n + c];
            if (r < coarse && c < coarse)
                EXPECT_NEAR(v, 0.5 * (1 << levels), 1e-12);
            else
                EXPECT_NEAR(v, 0.0, 1e-12);
        }
}

TEST(Wavelet, PerfectReconstructionAndParseval)
{
    for (int levels = 1; levels <= 5; ++levels) {
        const Image x = random_image(32, 40 + levels, -1, 1);
        const WaveletCoeffs w = wavelet_analysis(x, levels);
        EXPECT_NEAR(vec::norm2(w.c), vec::norm2(x.data), 1e-10);
        const Image back = wavelet_synthesis(w);
        EXPECT_LE(max_abs_diff(back.data, x.data), 1e-10);
    }
}

TEST(Wavelet, NonPowerOfTwoIsPaddedAndCropped)
{
    const Image x = random_image(12, 50);
    const WaveletCoeffs w = wavelet_analysis(x, 3);
    EXPECT_EQ(w.side, 16);
    EXPECT_LE(max_abs_diff(wavelet_synthesis(w).data, x.data), 1e-10);
}

TEST(Wavelet, RejectsTooManyLevels)
{
    EXPECT_THROW(wavelet_analysis(Image(8), 4), DimensionError);
    EXPECT_THROW(wavelet_analysis(Image(8), 0), DimensionError);
}

TEST(Wavelet, SynthesisIsAdjointOfAnalysis)
{
    // Orthogonality: <W x, c> = <x, W^T c>.
    const Image x = random_image(16, 60, -1, 1);
    WaveletCoeffs c{16, 3, 16, random_vector(256, 61)};
    const double lhs = vec::dot(wavelet_analysis(x, 3).c, c.c);
    const double rhs = vec::dot(x.data, wavelet_synthesis(c).data);
    EXPECT_NEAR(lhs, rhs, 1e-10);
}
