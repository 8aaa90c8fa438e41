#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include <dgct/network.hpp>

#include "test_support.hpp"

using namespace dgct;
using namespace dgct::testing;

namespace {

const fs::path kFixtures = DGCT_FIXTURE_DIR;

Architecture small_arch()
{
    Architecture a;
    a.depth = 3;
    a.channels = {3, 5, 7};
    return a;
}

/// Rebuilds container bytes from an edited manifest and the original blob.
std::string with_manifest(const std::string& bytes, const std::function<void(json&)>& edit)
{
    std::uint64_t len;
    std::memcpy(&len, bytes.data() + 8, 8);
    json m = json::parse(bytes.substr(16, len));
    edit(m);
    const std::string text = m.dump();
    std::string out = bytes.substr(0, 8);
    const std::uint64_t n = text.size();
    out.append(reinterpret_cast<const char*>(&n), 8);
    return out + text + bytes.substr(16 + len);
}

std::string parse_error_message(const std::string& bytes)
{
    try {
        parse_weights(bytes, "w");
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

WeightContainer random_container(const Architecture& a, std::uint64_t seed)
{
    WeightContainer c = WeightContainer::zeros(a);
    const auto v = random_vector(c.blob.size(), seed, -0.3, 0.3);
    for (std::size_t i = 0; i < v.size(); ++i)
        c.blob[i] = static_cast<float>(v[i]);
    return c;
}

} // namespace

TEST(Conv2d, HandComputedFiveByFive)
{
    FeatureMap in(1, 5);
    for (int i = 0; i < 25; ++i)
        in.data[i] = static_cast<float>(i + 1); // row r, col c holds 5r + c + 1

    // Picks the right neighbour: cross-correlation, not convolution.
    std::vector<float> shift{0, 0, 0, 0, 0, 1, 0, 0, 0};
    std::vector<float> bias{0.5f};
    FeatureMap s = conv2d(in, shift, bias, 1, 3, false);
    EXPECT_FLOAT_EQ(s.data[2 * 5 + 2], 14.5f);
    EXPECT_FLOAT_EQ(s.data[2 * 5 + 4], 0.5f); // zero padding beyond the edge

    std::vector<float> box(9, 1.0f);
    std::vector<float> zero{0.0f};
    FeatureMap b = conv2d(in, box, zero, 1, 3, false);
    EXPECT_FLOAT_EQ(b.data[0], 1 + 2 + 6 + 7);
    EXPECT_FLOAT_EQ(b.data[2 * 5 + 2], 9 * 13);
    EXPECT_FLOAT_EQ(b.data[4 * 5 + 4], 19 + 20 + 24 + 25);

    std::vector<float> neg{-100.0f};
    FeatureMap r = conv2d(in, box, neg, 1, 3, true);
    EXPECT_FLOAT_EQ(r.data[0], 0.0f);
    EXPECT_FLOAT_EQ(r.data[2 * 5 + 2], 17.0f);

    // Two input channels sum; two output channels are independent.
    FeatureMap two(2, 5);
    std::copy(in.data.begin(), in.data.end(), two.data.begin());
    std::copy(in.data.begin(), in.data.end(), two.data.begin() + 25);
    std::vector<float> w(2 * 2 * 9, 0.0f);
    w[4] = 1.0f;             // out 0 <- centre of in 0
    w[9 + 4] = 2.0f;         // out 0 <- 2 * centre of in 1
    w[2 * 9 + 9 + 0] = 1.0f; // out 1 <- up-left neighbour of in 1
    std::vector<float> b2{0.0f, 0.0f};
    FeatureMap m = conv2d(two, w, b2, 2, 3, false);
    EXPECT_FLOAT_EQ(m.data[7], 3 * 8);
    EXPECT_FLOAT_EQ(m.data[25 + 7], 2);
    EXPECT_THROW(conv2d(two, box, zero, 1, 3, false), DimensionError);
}

TEST(Network, ZeroContainerIsTheExactIdentity)
{
    const Network net(WeightContainer::zeros(Architecture{}));
    for (int side : {16, 19, 8}) {
        const Image x = random_image(side, 3 + side, -2.0, 5.0);
        EXPECT_EQ(net.apply(x), x) << side;
    }
    const Network fixture(load_weights(kFixtures / "zero.dgwc"));
    const Image x = random_image(21, 8);
    EXPECT_EQ(fixture.apply(x), x);
}

TEST(Network, TensorOrderAndSideMultiple)
{
    const Architecture a;
    const auto t = a.tensors();
    ASSERT_EQ(t.size(), 2u * (4 * 2 + 3 * 3 + 1));
    EXPECT_EQ(t.front().name, "enc0.conv0.weight");
    EXPECT_EQ(t.front().shape, (std::vector<int>{64, 1, 3, 3}));
    EXPECT_EQ(t.back().name, "out.bias");
    EXPECT_EQ(a.side_multiple(), 8);
    const auto dec0 = std::find_if(t.begin(), t.end(), [](const auto& r) { return r.name == "dec0.conv0.weight"; });
    ASSERT_NE(dec0, t.end());
    EXPECT_EQ(dec0->shape, (std::vector<int>{64, 128, 3, 3}));
}

TEST(Weights, RoundTripIsBitExact)
{
    WeightContainer c = random_container(small_arch(), 5);
    c.metadata.regime = "RISING";
    c.metadata.input = "TV-K";
    c.metadata.K = 10;
    c.metadata.nu = 0.02;
    c.metadata.geometry_fingerprint = "abc";
    const std::string bytes = serialize_weights(c);
    EXPECT_EQ(bytes.substr(0, 4), "DGWC");
    const WeightContainer back = parse_weights(bytes);
    EXPECT_EQ(back.blob, c.blob);
    EXPECT_EQ(back.metadata.to_json(), c.metadata.to_json());
    EXPECT_EQ(back.architecture.to_json(), c.architecture.to_json());
    EXPECT_EQ(serialize_weights(back), bytes);
}

TEST(Weights, TruncatedBlobNamesTheTensor)
{
    const std::string bytes = serialize_weights(random_container(small_arch(), 6));
    const std::string msg = parse_error_message(bytes.substr(0, bytes.size() - 2));
    EXPECT_NE(msg.find("out.bias"), std::string::npos) << msg;
    EXPECT_NE(msg.find("truncated"), std::string::npos) << msg;
}

TEST(Weights, MalformedContainersAreParseErrors)
{
    const std::string bytes = serialize_weights(random_container(small_arch(), 7));

    std::string bad = bytes;
    bad[0] = 'X';
    EXPECT_NE(parse_error_message(bad).find("magic"), std::string::npos);
    EXPECT_NE(parse_error_message("DG").find("magic"), std::string::npos);

    bad = bytes;
    bad[4] = 2;
    EXPECT_NE(parse_error_message(bad).find("version"), std::string::npos);

    const std::string shape = parse_error_message(with_manifest(bytes, [](json& m) {
        m["tensors"][0]["shape"] = {3, 1, 1, 9};
    }));
    EXPECT_NE(shape.find("enc0.conv0.weight"), std::string::npos) << shape;

    const std::string missing = parse_error_message(with_manifest(bytes, [](json& m) {
        m["tensors"].erase(m["tensors"].begin() + 2);
    }));
    EXPECT_NE(missing.find("missing tensor enc0.conv1.weight"), std::string::npos) << missing;

    const std::string layer = parse_error_message(with_manifest(bytes, [](json& m) {
        m["architecture"]["activation"] = "gelu";
    }));
    EXPECT_NE(layer.find("unsupported"), std::string::npos) << layer;

    const std::string kind = parse_error_message(with_manifest(bytes, [](json& m) {
        m["architecture"]["name"] = "transformer";
    }));
    EXPECT_NE(kind.find("transformer"), std::string::npos) << kind;

    EXPECT_THROW(parse_weights(bytes + "xxxx"), ParseError);
    EXPECT_THROW(load_weights(kFixtures / "does_not_exist.dgwc"), IoError);
}

TEST(Network, DeterministicAndFinite)
{
    const Network net(random_container(small_arch(), 8));
    const Image x = random_image(13, 2);
    const Image a = net.apply(x), b = net.apply(x);
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a == x);

    WeightContainer c = WeightContainer::zeros(small_arch());
    c.tensor("out.bias")[0] = std::numeric_limits<float>::infinity();
    EXPECT_THROW(Network(c).apply(x), NumericalError);
}

TEST(Network, MatchesPyTorchReference)
{
    const Network net(load_weights(kFixtures / "random.dgwc"));
    const std::vector<int> sides{16, 18, 21};
    std::size_t total = 0;
    for (int s : sides)
        total += static_cast<std::size_t>(s) * s;
    const auto in = read_f32(kFixtures / "random_inputs.f32", total);
    const auto ref = read_f32(kFixtures / "random_outputs.f32", total);
    std::size_t at = 0;
    for (int s : sides) {
        Image x(s);
        std::copy(in.begin() + at, in.begin() + at + x.size(), x.data.begin());
        const Image y = net.apply(x);
        double worst = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            worst = std::max(worst, std::abs(y.data[i] - ref[at + i]) / std::max(1.0, std::abs(ref[at + i])));
        EXPECT_LE(worst, 1e-4) << "side " << s;
        at += x.size();
    }
}
