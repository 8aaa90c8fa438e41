#include <gtest/gtest.h>

#include <dgct/experiment.hpp>

#include "test_support.hpp"

using namespace dgct;
using namespace dgct::testing;

namespace {

const fs::path kFixtures = DGCT_FIXTURE_DIR;

struct Problem {
    FanBeamGeometry g;
    Image gt;
    Sinogram y;
};

Problem problem(int side, int angles, double range, std::uint64_t seed, double nu = 0.01)
{
    Problem p{build_geometry(side, angles, range), {}, {}};
    PhantomSpec ps;
    ps.side = side;
    ps.seed = seed;
    p.gt = generate_phantom(ps);
    p.y = simulate_sinogram(p.g, p.gt, nu, seed + 1);
    return p;
}

SolverConfig coarse()
{
    SolverConfig c;
    c.lambda = 0.5;
    c.max_total_iters = 999; // replaced by K
    return c;
}

} // namespace

TEST(DeepGuess, ZerosIsZero)
{
    const Problem p = problem(16, 10, 180, 1);
    const DeepGuess dg = compute_deep_guess(DeepGuessStrategy::zeros(), p.g, p.y, coarse());
    EXPECT_EQ(dg.x, Image(16));
    EXPECT_EQ(dg.provenance["strategy"], "zeros");
}

TEST(DeepGuess, MbirKIsKIterationsOfTheSolver)
{
    const Problem p = problem(24, 15, 180, 2);
    SolverConfig c = coarse();
    c.max_total_iters = 10;
    const DeepGuess tv = compute_deep_guess(DeepGuessStrategy::mbir_k(MbirModel::tv, 10), p.g, p.y, coarse());
    EXPECT_EQ(tv.x, sgp_tv_solve(p.g, p.y, Image(24), c).x);
    EXPECT_EQ(tv.provenance["K"], 10);

    c.max_total_iters = 7;
    const DeepGuess tpv = compute_deep_guess(DeepGuessStrategy::mbir_k(MbirModel::tpv, 7), p.g, p.y, coarse());
    EXPECT_EQ(tpv.x, irl1_tpv_solve(p.g, p.y, Image(24), c).x);
    EXPECT_THROW(compute_deep_guess(DeepGuessStrategy::mbir_k(MbirModel::tv, 0), p.g, p.y, coarse()), DomainError);
}

TEST(DeepGuess, FbpStrategiesNeedAHalfScan)
{
    const Problem p = problem(16, 10, 180, 3);
    EXPECT_EQ(compute_deep_guess(DeepGuessStrategy::fbp(), p.g, p.y, coarse()).x, fbp_reconstruct(p.g, p.y));

    const Problem s = problem(16, 10, 120, 3);
    EXPECT_THROW(compute_deep_guess(DeepGuessStrategy::fbp(), s.g, s.y, coarse()), DomainError);
    auto zero = std::make_shared<const Network>(WeightContainer::zeros(Architecture{}));
    EXPECT_THROW(compute_deep_guess(DeepGuessStrategy::fbp_net(zero, "x"), s.g, s.y, coarse()), DomainError);
    // MBIR-K works on any range
    EXPECT_NO_THROW(compute_deep_guess(DeepGuessStrategy::mbir_k(MbirModel::tv, 2), s.g, s.y, coarse()));
}

TEST(DeepGuess, ZeroNetPassesTheCoarseImageThrough)
{
    const Problem p = problem(20, 12, 180, 4);
    auto zero = std::make_shared<const Network>(load_weights(kFixtures / "zero.dgwc"));
    const DeepGuess a = compute_deep_guess(DeepGuessStrategy::fbp_net(zero, "fp"), p.g, p.y, coarse());
    EXPECT_EQ(a.x, fbp_reconstruct(p.g, p.y));
    EXPECT_EQ(a.provenance["weights_fingerprint"], "fp");

    const DeepGuess b =
        compute_deep_guess(DeepGuessStrategy::mbir_k_net(MbirModel::tv, 3, zero, "fp"), p.g, p.y, coarse());
    EXPECT_EQ(b.x, compute_deep_guess(DeepGuessStrategy::mbir_k(MbirModel::tv, 3), p.g, p.y, coarse()).x);
}

TEST(DeepGuess, MissingWeights)
{
    const Problem p = problem(16, 10, 180, 5);
    EXPECT_THROW(compute_deep_guess(DeepGuessStrategy::fbp_net(nullptr, ""), p.g, p.y, coarse()), Error);
    EXPECT_THROW(load_network(kFixtures / "missing.dgwc"), IoError);
    InitSpec spec;
    spec.name = "net:whatever";
    EXPECT_THROW(make_strategy(spec, nullptr), Error);
}

TEST(DeepGuess, GeometryMismatchWarns)
{
    const Problem p = problem(16, 10, 180, 6);
    WeightMetadata meta;
    meta.geometry_fingerprint = "0000000000000000";
    auto net = std::make_shared<const Network>(WeightContainer::zeros(Architecture{}, meta));
    ::testing::internal::CaptureStderr();
    const DeepGuess dg = compute_deep_guess(DeepGuessStrategy::fbp_net(net, "fp"), p.g, p.y, coarse());
    const std::string err = ::testing::internal::GetCapturedStderr();
    EXPECT_NE(err.find("warning"), std::string::npos);
    EXPECT_TRUE(dg.provenance.contains("warning"));

    meta.geometry_fingerprint = p.g.fingerprint();
    auto same = std::make_shared<const Network>(WeightContainer::zeros(Architecture{}, meta));
    ::testing::internal::CaptureStderr();
    const DeepGuess ok = compute_deep_guess(DeepGuessStrategy::fbp_net(same, "fp"), p.g, p.y, coarse());
    EXPECT_EQ(::testing::internal::GetCapturedStderr(), "");
    EXPECT_FALSE(ok.provenance.contains("warning"));
}

TEST(DeepGuess, NetInitTakesItsInputFromTheMetadata)
{
    WeightMetadata meta;
    meta.input = "TpV-K";
    meta.K = 4;
    LoadedNet net{std::make_shared<const Network>(WeightContainer::zeros(Architecture{}, meta)), "fp"};
    InitSpec spec;
    spec.name = "net:x";
    const DeepGuessStrategy s = make_strategy(spec, &net);
    EXPECT_EQ(s.kind, DeepGuessStrategy::Kind::mbir_k_net);
    EXPECT_EQ(s.model, MbirModel::tpv);
    EXPECT_EQ(s.K, 4);
}

TEST(DeepGuess, TrainedNetImprovesOnFbp)
{
    const fs::path w = kFixtures / "lpp_fbp_64.dgwc";
    if (!fs::exists(w))
        GTEST_SKIP() << "trained fixture not generated";
    const LoadedNet net = load_network(w);
    InitSpec spec;
    spec.name = "net:" + w.string();
    for (std::uint64_t seed : {900001u, 900002u, 900003u}) {
        const Problem p = problem(64, 30, 180, seed);
        const DeepGuess dg = compute_deep_guess(make_strategy(spec, &net), p.g, p.y, coarse());
        const double fbp = ssim(fbp_reconstruct(p.g, p.y), p.gt);
        EXPECT_GT(ssim(dg.x, p.gt), fbp + 20.0) << seed;
    }
}
