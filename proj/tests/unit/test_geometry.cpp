#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <dgct/geometry.hpp>
#include <dgct/operator_norm.hpp>

#include "test_support.hpp"

using namespace dgct;
using namespace dgct::testing;

TEST(BuildGeometry, StandardProtocolsGetTwiceTheSideInDetectorBins)
{
    const auto g256 = build_geometry(256, 180, 180);
    EXPECT_EQ(g256.n_det, 512);
    EXPECT_EQ(g256.n_angles, 180);
    EXPECT_DOUBLE_EQ(g256.angular_range, 180.0);

    const auto g512 = build_geometry(512, 60, 180);
    EXPECT_EQ(g512.n_det, 1024);
    EXPECT_DOUBLE_EQ(g512.source_to_center, 1024.0);
    EXPECT_DOUBLE_EQ(g512.center_to_detector, 1024.0);
    EXPECT_DOUBLE_EQ(g512.det_pixel_size, 1.0);
}

TEST(BuildGeometry, MinimalGeometryIsValid)
{
    const auto g = build_geometry(2, 1, 360);
    EXPECT_EQ(g.n_det, 4);
    EXPECT_DOUBLE_EQ(g.angle(0), 0.0);
}

TEST(BuildGeometry, RejectsNonPositiveInputs)
{
    EXPECT_THROW(build_geometry(1, 10, 180), DimensionError);
    EXPECT_THROW(build_geometry(8, 0, 180), DimensionError);
    EXPECT_THROW(build_geometry(8, 10, 0), DimensionError);
    EXPECT_THROW(build_geometry(8, 10, 361), DimensionError);
}

TEST(BuildGeometry, AnglesAreUniformWithEndpointExcluded)
{
    const auto g = build_geometry(16, 4, 180);
    EXPECT_NEAR(g.angle(1), M_PI / 4, 1e-15);
    EXPECT_NEAR(g.angle(3), 3 * M_PI / 4, 1e-15);
}

TEST(BuildGeometry, FingerprintTracksEveryField)
{
    auto a = build_geometry(16, 10, 180);
    auto b = a;
    EXPECT_EQ(a.fingerprint(), b.fingerprint());
    b.det_pixel_size = 0.5;
    EXPECT_NE(a.fingerprint(), b.fingerprint());
}

TEST(ForwardProject, ZeroImageGivesZeroSinogram)
{
    const auto g = build_geometry(8, 12, 360);
    const Sinogram y = forward_project(g, Image(8));
    for (double v : y.data)
        EXPECT_EQ(v, 0.0);
}

TEST(ForwardProject, ChordThroughSinglePixelMatchesRayBoxIntersection)
{
    FanBeamGeometry g = build_geometry(5, 1, 360);
    g.n_det = 1; // single bin on the central ray, along y = 0 through pixel row 2
    const Ray ray = ray_for(g, 0, 0);
    Image x(5);
    x(2, 2) = 1.0; // pixel [-0.5, 0.5]^2 straddles the origin
    const Sinogram y = FanBeamProjector(g).forward(x);
    EXPECT_NEAR(y.data[0], 1.0, 1e-12);
    EXPECT_NEAR(y.data[0], segment_box_length(ray.sx, ray.sy, ray.dx, ray.dy, -0.5, 0.5, -0.5, 0.5), 1e-12);

    // Diagonal ray: chord through a unit pixel along the diagonal is sqrt(2).
    FanBeamGeometry d = g;
    d.angular_range = 360.0;
    d.n_angles = 8; // angle 1 is 45 degrees
    const Sinogram yd = FanBeamProjector(d).forward(x);
    EXPECT_NEAR(yd(1, 0), std::sqrt(2.0), 1e-12);
}

TEST(ForwardProject, MatchesDenseOracleOnSmallGrids)
{
    for (int n : {4, 8, 12}) {
        const auto g = build_geometry(n, 12, 360);
        const auto m = dense_projection_matrix(g);
        const Image x = random_image(n, 100 + n);
        const auto expected = matvec(m, g.data_size(), g.image_size(), x.data);
        const auto cached = FanBeamProjector(g).forward(x);
        const auto traced = forward_project(g, x);
        EXPECT_LE(max_abs_diff(cached.data, expected), 1e-6) << "n=" << n;
        EXPECT_EQ(cached.data, traced.data) << "cached and traced paths must agree bitwise";
    }
}

TEST(ForwardProject, RejectsMismatchedImage)
{
    const auto g = build_geometry(8, 4, 180);
    EXPECT_THROW(forward_project(g, Image(6)), DimensionError);
    EXPECT_THROW(back_project(g, Sinogram(4, 3)), DimensionError);
}

TEST(ForwardProject, IsLinear)
{
    const auto g = build_geometry(16, 20, 180);
    const FanBeamProjector A(g);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int trial = 0; trial < 5; ++trial) {
        const double alpha = u(rng), beta = u(rng);
        const Image x1 = random_image(16, 10 + trial), x2 = random_image(16, 20 + trial);
        Image comb(16);
        for (std::size_t i = 0; i < comb.size(); ++i)
            comb.data[i] = alpha * x1.data[i] + beta * x2.data[i];
        const auto lhs = A.forward(comb);
        const auto y1 = A.forward(x1), y2 = A.forward(x2);
        double diff = 0.0, ref = 0.0;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            const double rhs = alpha * y1.data[i] + beta * y2.data[i];
            diff += (lhs.data[i] - rhs) * (lhs.data[i] - rhs);
            ref += rhs * rhs;
        }
        EXPECT_LE(std::sqrt(diff / ref), 1e-6);
    }
}

TEST(ForwardProject, PreservesNonnegativity)
{
    const auto g = build_geometry(16, 30, 180);
    const auto y = FanBeamProjector(g).forward(random_image(16, 3));
    for (double v : y.data)
        EXPECT_GE(v, 0.0);
}

TEST(BackProject, ZeroSinogramGivesZeroImage)
{
    const auto g = build_geometry(8, 12, 360);
    const Image x = back_project(g, Sinogram(12, 16));
    for (double v : x.data)
        EXPECT_EQ(v, 0.0);
}

TEST(BackProject, PassesDotProductTest)
{
    for (int n : {4, 8, 12, 16}) {
        const auto g = build_geometry(n, 12, 360);
        const FanBeamProjector A(g);
        for (std::uint64_t s = 0; s < 4; ++s) {
            const Image x = random_image(n, s, -1, 1);
            Sinogram y(g.n_angles, g.n_det);
            y.data = random_vector(y.size(), 1000 + s);
            const auto ax = A.forward(x);
            const auto aty = A.backward(y);
            const double lhs = vec::dot(ax.data, y.data);
            const double rhs = vec::dot(x.data, aty.data);
            EXPECT_LE(std::abs(lhs - rhs) / (vec::norm2(ax.data) * vec::norm2(y.data)), 1e-6);
        }
    }
}

TEST(BackProject, SingleBinIsSupportedOnTracedPixels)
{
    const auto g = build_geometry(8, 12, 360);
    const auto m = dense_projection_matrix(g);
    Sinogram y(g.n_angles, g.n_det);
    const std::size_t row = 5 * g.n_det + 7;
    y.data[row] = 1.0;
    const Image x = FanBeamProjector(g).backward(y);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(x.data[i], m[row * g.image_size() + i], 1e-6);
        EXPECT_EQ(x.data[i] > 0.0, m[row * g.image_size() + i] > 1e-12);
    }
}

TEST(OperatorNorm, ScalarOperatorNormIsTheEntry)
{
    const DenseMatrixOperator a(1, 1, {2.5});
    EXPECT_NEAR(estimate_operator_norm(a, false, 5), 2.5, 1e-12);
}

TEST(OperatorNorm, MatchesDenseSvd)
{
    const auto g = build_geometry(8, 12, 360);
    const auto m = dense_projection_matrix(g);
    Eigen::MatrixXd dense(g.data_size(), g.image_size());
    for (std::size_t r = 0; r < g.data_size(); ++r)
        for (std::size_t c = 0; c < g.image_size(); ++c)
            dense(r, c) = m[r * g.image_size() + c];
    const double smax = Eigen::JacobiSVD<Eigen::MatrixXd>(dense).singularValues()(0);
    const double est = estimate_operator_norm(g, false, 100);
    EXPECT_NEAR(est, smax, 0.01 * smax);
}

TEST(OperatorNorm, StackedOperatorDominates)
{
    const auto g = build_geometry(8, 12, 360);
    const double a = estimate_operator_norm(g, false, 100);
    const double m = estimate_operator_norm(g, true, 100);
    EXPECT_GE(m, a);
}

TEST(OperatorNorm, DeterministicForFixedSeed)
{
    const auto g = build_geometry(8, 6, 180);
    EXPECT_EQ(estimate_operator_norm(g, true, 20), estimate_operator_norm(g, true, 20));
}
