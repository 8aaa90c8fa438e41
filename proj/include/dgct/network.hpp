#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "io.hpp"

namespace dgct {

// ---------------------------------------------------------------------------
// Weight container ("DGWC"):
//   "DGWC" | u32 version | u64 manifest length | JSON manifest | f32 blob
// All integers and floats little-endian; tensor offsets are in bytes from the
// start of the blob. See docs/weight_container.md.
// ---------------------------------------------------------------------------

inline constexpr char kWeightMagic[4] = {'D', 'G', 'W', 'C'};
inline constexpr std::uint32_t kWeightVersion = 1;

struct TensorRecord {
    std::string name;
    std::vector<int> shape;
    std::uint64_t offset = 0; ///< bytes from blob start

    std::size_t count() const
    {
        std::size_t n = 1;
        for (int s : shape)
            n *= static_cast<std::size_t>(s);
        return n;
    }
};

/// ResUNet layout: `depth` levels with channels[l] features, `convs_per_level`
/// 3x3 convolutions + ReLU per level, 2x2 max-pooling down, nearest 2x
/// upsampling followed by a 3x3 conv + ReLU up, skip concatenation
/// [skip, up], a final 1x1 conv to one channel and the global residual
/// output = input + correction.
struct Architecture {
    int depth = 4;
    std::vector<int> channels{64, 128, 256, 512};
    int convs_per_level = 2;
    bool residual = true;

    void validate() const
    {
        if (depth < 1 || static_cast<int>(channels.size()) != depth || convs_per_level < 1)
            throw ParseError("architecture: depth, channels and convs_per_level disagree");
        for (int c : channels)
            if (c < 1)
                throw ParseError("architecture: channel counts must be positive");
    }

    /// Every tensor the forward pass reads, in canonical order.
    std::vector<TensorRecord> tensors() const
    {
        std::vector<TensorRecord> out;
        auto conv = [&](const std::string& name, int co, int ci, int k) {
            out.push_back({name + ".weight", {co, ci, k, k}, 0});
            out.push_back({name + ".bias", {co}, 0});
        };
        for (int l = 0; l < depth; ++l)
            for (int j = 0; j < convs_per_level; ++j)
                conv("enc" + std::to_string(l) + ".conv" + std::to_string(j), channels[l],
                     j > 0 ? channels[l] : (l == 0 ? 1 : channels[l - 1]), 3);
        for (int l = depth - 2; l >= 0; --l) {
            conv("up" + std::to_string(l), channels[l], channels[l + 1], 3);
            for (int j = 0; j < convs_per_level; ++j)
                conv("dec" + std::to_string(l) + ".conv" + std::to_string(j), channels[l],
                     j == 0 ? 2 * channels[l] : channels[l], 3);
        }
        conv("out", 1, channels[0], 1);
        std::uint64_t offset = 0;
        for (auto& t : out) {
            t.offset = offset;
            offset += 4 * t.count();
        }
        return out;
    }

    /// Side multiple needed by the pooling stages.
    int side_multiple() const { return 1 << (depth - 1); }

    json to_json() const
    {
        return {{"name", "resunet"},         {"depth", depth},         {"channels", channels},
                {"convs_per_level", convs_per_level}, {"activation", "relu"}, {"downsample", "maxpool2"},
                {"upsample", "nearest2+conv3"}, {"residual", residual}, {"in_channels", 1}, {"out_channels", 1}};
    }

    static Architecture from_json(const json& j)
    {
        try {
            if (j.value("name", "") != "resunet")
                throw ParseError("architecture: unsupported network type '" + j.value("name", "") + "'");
            if (j.value("activation", "relu") != "relu" || j.value("downsample", "maxpool2") != "maxpool2" ||
                j.value("upsample", "nearest2+conv3") != "nearest2+conv3")
                throw ParseError("architecture: unsupported layer type");
            if (j.value("in_channels", 1) != 1 || j.value("out_channels", 1) != 1)
                throw ParseError("architecture: only single-channel images are supported");
            Architecture a;
            a.depth = j.at("depth").get<int>();
            a.channels = j.at("channels").get<std::vector<int>>();
            a.convs_per_level = j.value("convs_per_level", 2);
            a.residual = j.value("residual", true);
            a.validate();
            return a;
        } catch (const json::exception& e) {
            throw ParseError(std::string("architecture: ") + e.what());
        }
    }
};

/// Training provenance stored in the container.
struct WeightMetadata {
    std::string regime = "LPP";   ///< LPP or RISING
    std::string input = "FBP";    ///< FBP, TV-K or TpV-K
    int K = 0;
    double nu = 0.0;
    std::string geometry_fingerprint;

    json to_json() const
    {
        return {{"regime", regime}, {"input", input}, {"K", K}, {"nu", nu},
                {"geometry_fingerprint", geometry_fingerprint}};
    }

    static WeightMetadata from_json(const json& j)
    {
        WeightMetadata m;
        m.regime = j.value("regime", "LPP");
        m.input = j.value("input", "FBP");
        m.K = j.value("K", 0);
        m.nu = j.value("nu", 0.0);
        m.geometry_fingerprint = j.value("geometry_fingerprint", "");
        if (m.regime != "LPP" && m.regime != "RISING")
            throw ParseError("weights: regime must be LPP or RISING");
        if (m.input != "FBP" && m.input != "TV-K" && m.input != "TpV-K")
            throw ParseError("weights: input must be FBP, TV-K or TpV-K");
        return m;
    }
};

struct WeightContainer {
    Architecture architecture;
    WeightMetadata metadata;
    std::vector<TensorRecord> tensors;
    std::vector<float> blob;

    /// All tensors of the architecture, zero filled.
    static WeightContainer zeros(const Architecture& a, WeightMetadata m = {})
    {
        WeightContainer c{a, std::move(m), a.tensors(), {}};
        std::size_t n = 0;
        for (const auto& t : c.tensors)
            n += t.count();
        c.blob.assign(n, 0.0f);
        return c;
    }

    std::span<float> tensor(const std::string& name)
    {
        for (const auto& t : tensors)
            if (t.name == name)
                return std::span<float>(blob).subspan(t.offset / 4, t.count());
        throw ParseError("weights: no tensor named " + name);
    }

    json manifest() const
    {
        json list = json::array();
        for (const auto& t : tensors)
            list.push_back({{"name", t.name}, {"shape", t.shape}, {"dtype", "f32"}, {"offset", t.offset}});
        return {{"architecture", architecture.to_json()},
                {"metadata", metadata.to_json()},
                {"tensors", list},
                {"blob_bytes", 4 * blob.size()}};
    }
};

inline std::string serialize_weights(const WeightContainer& c)
{
    const std::string manifest = c.manifest().dump();
    std::string out(kWeightMagic, 4);
    const std::uint32_t version = detail::to_little_endian(kWeightVersion);
    const std::uint64_t len = detail::to_little_endian(static_cast<std::uint64_t>(manifest.size()));
    out.append(reinterpret_cast<const char*>(&version), 4);
    out.append(reinterpret_cast<const char*>(&len), 8);
    out += manifest;
    const std::size_t base = out.size();
    out.resize(base + 4 * c.blob.size());
    for (std::size_t i = 0; i < c.blob.size(); ++i) {
        const std::uint32_t bits = detail::to_little_endian(std::bit_cast<std::uint32_t>(c.blob[i]));
        std::memcpy(out.data() + base + 4 * i, &bits, 4);
    }
    return out;
}

inline void save_weights(const fs::path& path, const WeightContainer& c)
{
    detail::write_text(path, serialize_weights(c));
}

/// Parses and validates a container: every tensor of the architecture must be
/// present with its declared shape, and the blob must hold exactly the listed
/// tensors.
inline WeightContainer parse_weights(const std::string& bytes, const std::string& origin = "weights")
{
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kWeightMagic, 4) != 0)
        throw ParseError(origin + ": not a DGWC container (bad magic)");
    std::uint32_t version;
    std::uint64_t len;
    std::memcpy(&version, bytes.data() + 4, 4);
    std::memcpy(&len, bytes.data() + 8, 8);
    version = detail::to_little_endian(version);
    len = detail::to_little_endian(len);
    if (version != kWeightVersion)
        throw ParseError(origin + ": unsupported container version " + std::to_string(version));
    if (len > bytes.size() - 16)
        throw ParseError(origin + ": manifest length exceeds file size");

    json m;
    try {
        m = json::parse(bytes.substr(16, len));
    } catch (const json::exception& e) {
        throw ParseError(origin + ": manifest is not valid JSON: " + e.what());
    }
    WeightContainer c;
    c.architecture = Architecture::from_json(m.at("architecture"));
    c.metadata = WeightMetadata::from_json(m.value("metadata", json::object()));

    const std::size_t blob_start = 16 + len;
    const std::size_t blob_bytes = bytes.size() - blob_start;
    std::map<std::string, TensorRecord> listed;
    try {
        for (const auto& t : m.at("tensors")) {
            TensorRecord r{t.at("name").get<std::string>(), t.at("shape").get<std::vector<int>>(),
                           t.at("offset").get<std::uint64_t>()};
            if (t.value("dtype", "f32") != "f32")
                throw ParseError(origin + ": tensor " + r.name + " is not f32");
            if (r.offset % 4 != 0 || r.offset + 4 * r.count() > blob_bytes)
                throw ParseError(origin + ": tensor " + r.name + " extends past the end of the blob (truncated file?)");
            listed[r.name] = r;
        }
    } catch (const json::exception& e) {
        throw ParseError(origin + ": bad tensor list: " + e.what());
    }

    std::size_t total = 0;
    for (auto expected : c.architecture.tensors()) {
        auto it = listed.find(expected.name);
        if (it == listed.end())
            throw ParseError(origin + ": missing tensor " + expected.name);
        if (it->second.shape != expected.shape)
            throw ParseError(origin + ": tensor " + expected.name + " has the wrong shape");
        expected.offset = it->second.offset;
        c.tensors.push_back(expected);
        total += 4 * expected.count();
    }
    if (listed.size() != c.tensors.size())
        throw ParseError(origin + ": container lists tensors the architecture does not use");
    if (total != blob_bytes)
        throw ParseError(origin + ": blob holds " + std::to_string(blob_bytes) + " bytes, tensors need " +
                         std::to_string(total));

    c.blob.resize(blob_bytes / 4);
    for (std::size_t i = 0; i < c.blob.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, bytes.data() + blob_start + 4 * i, 4);
        c.blob[i] = std::bit_cast<float>(detail::to_little_endian(bits));
    }
    // Re-base offsets on a packed copy so tensor() can index the blob directly.
    std::vector<float> packed;
    packed.reserve(c.blob.size());
    for (auto& t : c.tensors) {
        const std::size_t at = packed.size();
        packed.insert(packed.end(), c.blob.begin() + t.offset / 4, c.blob.begin() + t.offset / 4 + t.count());
        t.offset = 4 * at;
    }
    c.blob = std::move(packed);
    return c;
}

inline WeightContainer load_weights(const fs::path& path)
{
    return parse_weights(detail::read_text(path), path.string());
}

/// FNV-1a 64 of the container bytes, hex encoded.
inline std::string weights_fingerprint(const std::string& bytes)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Forward pass (f32)
// ---------------------------------------------------------------------------

struct FeatureMap {
    int channels = 0;
    int side = 0;
    std::vector<float> data; ///< channel-major, then row-major

    FeatureMap() = default;
    FeatureMap(int c, int s) : channels(c), side(s), data(static_cast<std::size_t>(c) * s * s, 0.0f) {}

    float* plane(int c) { return data.data() + static_cast<std::size_t>(c) * side * side; }
    const float* plane(int c) const { return data.data() + static_cast<std::size_t>(c) * side * side; }
};

/// k x k convolution (cross-correlation, as in the usual deep-learning
/// frameworks) with zero padding k/2; weights are [c_out, c_in, k, k].
inline FeatureMap conv2d(const FeatureMap& in, std::span<const float> w, std::span<const float> b, int c_out, int k,
                         bool relu)
{
    const int ci_n = in.channels, n = in.side, pad = k / 2;
    detail::require_dims(w.size() == static_cast<std::size_t>(c_out) * ci_n * k * k && b.size() == std::size_t(c_out),
                         "conv2d: weight shape does not match input channels");
    FeatureMap out(c_out, n);
    for (int co = 0; co < c_out; ++co) {
        float* o = out.plane(co);
        std::fill(o, o + n * n, b[co]);
        for (int ci = 0; ci < ci_n; ++ci) {
            const float* src = in.plane(ci);
            const float* wk = w.data() + (static_cast<std::size_t>(co) * ci_n + ci) * k * k;
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    const float wv = wk[ky * k + kx];
                    if (wv == 0.0f)
                        continue;
                    const int dy = ky - pad, dx = kx - pad;
                    const int r0 = std::max(0, -dy), r1 = std::min(n, n - dy);
                    const int c0 = std::max(0, -dx), c1 = std::min(n, n - dx);
                    for (int r = r0; r < r1; ++r) {
                        float* orow = o + r * n;
                        const float* irow = src + (r + dy) * n + dx;
                        for (int c = c0; c < c1; ++c)
                            orow[c] += wv * irow[c];
                    }
                }
        }
        if (relu)
            for (int i = 0; i < n * n; ++i)
                o[i] = std::max(o[i], 0.0f);
    }
    return out;
}

namespace detail {

inline FeatureMap max_pool2(const FeatureMap& in)
{
    const int h = in.side / 2;
    FeatureMap out(in.channels, h);
    for (int c = 0; c < in.channels; ++c) {
        const float* s = in.plane(c);
        float* o = out.plane(c);
        for (int r = 0; r < h; ++r)
            for (int q = 0; q < h; ++q) {
                const int i = 2 * r * in.side + 2 * q;
                o[r * h + q] = std::max({s[i], s[i + 1], s[i + in.side], s[i + in.side + 1]});
            }
    }
    return out;
}

inline FeatureMap upsample_nearest2(const FeatureMap& in)
{
    const int n = 2 * in.side;
    FeatureMap out(in.channels, n);
    for (int c = 0; c < in.channels; ++c) {
        const float* s = in.plane(c);
        float* o = out.plane(c);
        for (int r = 0; r < n; ++r)
            for (int q = 0; q < n; ++q)
                o[r * n + q] = s[(r / 2) * in.side + q / 2];
    }
    return out;
}

inline FeatureMap concat(const FeatureMap& a, const FeatureMap& b)
{
    FeatureMap out(a.channels + b.channels, a.side);
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.data.size());
    return out;
}

} // namespace detail

/// Immutable after construction; apply() keeps its scratch local, so one
/// Network can serve concurrent calls.
class Network {
public:
    explicit Network(WeightContainer c) : c_(std::move(c))
    {
        for (const auto& t : c_.tensors)
            index_[t.name] = t;
    }

    const Architecture& architecture() const { return c_.architecture; }
    const WeightMetadata& metadata() const { return c_.metadata; }

    /// Sides that are not a multiple of 2^(depth-1) are reflect-padded at the
    /// bottom/right and cropped back.
    Image apply(const Image& x) const
    {
        const int m = c_.architecture.side_multiple();
        const int n = x.side;
        const int padded = (n + m - 1) / m * m;
        detail::require_dims(padded - n < n, "network_apply: image too small for reflect padding");
        FeatureMap in(1, padded);
        for (int r = 0; r < padded; ++r)
            for (int q = 0; q < padded; ++q) {
                const int rr = r < n ? r : 2 * n - 2 - r;
                const int qq = q < n ? q : 2 * n - 2 - q;
                in.data[static_cast<std::size_t>(r) * padded + q] = static_cast<float>(x(std::max(rr, 0), std::max(qq, 0)));
            }

        const auto& a = c_.architecture;
        std::vector<FeatureMap> skips;
        FeatureMap h = in;
        for (int l = 0; l < a.depth; ++l) {
            if (l > 0)
                h = detail::max_pool2(h);
            for (int j = 0; j < a.convs_per_level; ++j)
                h = conv("enc" + std::to_string(l) + ".conv" + std::to_string(j), h, a.channels[l], 3, true);
            skips.push_back(h);
        }
        for (int l = a.depth - 2; l >= 0; --l) {
            FeatureMap up = conv("up" + std::to_string(l), detail::upsample_nearest2(h), a.channels[l], 3, true);
            h = detail::concat(skips[l], up);
            for (int j = 0; j < a.convs_per_level; ++j)
                h = conv("dec" + std::to_string(l) + ".conv" + std::to_string(j), h, a.channels[l], 3, true);
        }
        const FeatureMap corr = conv("out", h, 1, 1, false);

        Image y(n);
        for (int r = 0; r < n; ++r)
            for (int q = 0; q < n; ++q) {
                const std::size_t i = static_cast<std::size_t>(r) * padded + q;
                // residual added in double so a zero correction returns x exactly
                y(r, q) = (a.residual ? x(r, q) : 0.0) + static_cast<double>(corr.data[i]);
            }
        if (!vec::all_finite(y.span()))
            throw NumericalError("network_apply: non-finite output");
        return y;
    }

private:
    FeatureMap conv(const std::string& name, const FeatureMap& in, int c_out, int k, bool relu) const
    {
        return conv2d(in, tensor(name + ".weight"), tensor(name + ".bias"), c_out, k, relu);
    }

    std::span<const float> tensor(const std::string& name) const
    {
        const auto& t = index_.at(name);
        return std::span<const float>(c_.blob).subspan(t.offset / 4, t.count());
    }

    WeightContainer c_;
    std::map<std::string, TensorRecord> index_;
};

inline Image network_apply(const Network& net, const Image& x) { return net.apply(x); }

} // namespace dgct
