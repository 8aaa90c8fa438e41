#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "geometry.hpp"
#include "image.hpp"

namespace dgct {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace detail {

inline std::uint32_t to_little_endian(std::uint32_t v)
{
    if constexpr (std::endian::native == std::endian::big)
        return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
    return v;
}

inline std::uint64_t to_little_endian(std::uint64_t v)
{
    if constexpr (std::endian::native == std::endian::big)
        return (std::uint64_t(to_little_endian(std::uint32_t(v))) << 32) | to_little_endian(std::uint32_t(v >> 32));
    return v;
}

inline std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline json read_json(const fs::path& path)
{
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size())))
        throw IoError("cannot write " + path.string());
}

} // namespace detail

/// Sidecar of a .f32 file: same stem, .json extension.
inline fs::path sidecar_path(const fs::path& f32) { return fs::path(f32).replace_extension(".json"); }

inline void write_json(const fs::path& path, const json& j) { detail::write_text(path, j.dump(2) + "\n"); }
inline json read_json(const fs::path& path) { return detail::read_json(path); }

/// Values rounded to float and stored little-endian.
inline void write_f32(const fs::path& path, std::span<const double> values)
{
    std::string bytes(values.size() * 4, '\0');
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint32_t bits = detail::to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(values[i])));
        std::memcpy(bytes.data() + 4 * i, &bits, 4);
    }
    detail::write_text(path, bytes);
}

inline std::vector<double> read_f32(const fs::path& path, std::size_t expected_count)
{
    const std::string bytes = detail::read_text(path);
    if (bytes.size() != expected_count * 4)
        throw ParseError(path.string() + ": expected " + std::to_string(expected_count) + " floats, file has " +
                         std::to_string(bytes.size()) + " bytes");
    std::vector<double> out(expected_count);
    for (std::size_t i = 0; i < expected_count; ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, bytes.data() + 4 * i, 4);
        out[i] = std::bit_cast<float>(detail::to_little_endian(bits));
    }
    return out;
}

inline json geometry_to_json(const FanBeamGeometry& g)
{
    return {{"image_side", g.image_side},
            {"n_angles", g.n_angles},
            {"angular_range", g.angular_range},
            {"n_det", g.n_det},
            {"det_pixel_size", g.det_pixel_size},
            {"distances", {{"source_to_center", g.source_to_center}, {"center_to_detector", g.center_to_detector}}},
            {"fingerprint", g.fingerprint()}};
}

inline FanBeamGeometry geometry_from_json(const json& j)
{
    try {
        FanBeamGeometry g;
        g.image_side = j.at("image_side").get<int>();
        g.n_angles = j.at("n_angles").get<int>();
        g.angular_range = j.at("angular_range").get<double>();
        g.n_det = j.at("n_det").get<int>();
        g.det_pixel_size = j.value("det_pixel_size", 1.0);
        g.source_to_center = j.at("distances").at("source_to_center").get<double>();
        g.center_to_detector = j.at("distances").at("center_to_detector").get<double>();
        g.validate();
        return g;
    } catch (const json::exception& e) {
        throw ParseError(std::string("geometry: ") + e.what());
    }
}

/// Image as <path>.f32 plus sidecar {"side", ...extra}.
inline void save_image(const fs::path& path, const Image& x, json extra = json::object())
{
    write_f32(path, x.span());
    extra["side"] = x.side;
    write_json(sidecar_path(path), extra);
}

inline Image load_image(const fs::path& path)
{
    const json meta = read_json(sidecar_path(path));
    if (!meta.contains("side") || !meta["side"].is_number_integer())
        throw ParseError(sidecar_path(path).string() + ": missing integer 'side'");
    Image x(meta["side"].get<int>());
    x.data = read_f32(path, x.size());
    return x;
}

struct SinogramFile {
    Sinogram y;
    FanBeamGeometry geometry;
    double noise_level = 0.0;
    std::uint64_t seed = 0;
};

inline void save_sinogram(const fs::path& path, const Sinogram& y, const FanBeamGeometry& g, double noise_level,
                          std::uint64_t seed)
{
    detail::require_dims(y.n_angles == g.n_angles && y.n_det == g.n_det, "save_sinogram: sinogram/geometry mismatch");
    write_f32(path, y.span());
    json meta = geometry_to_json(g);
    meta["noise_level"] = noise_level;
    meta["seed"] = seed;
    write_json(sidecar_path(path), meta);
}

inline SinogramFile load_sinogram(const fs::path& path)
{
    const json meta = read_json(sidecar_path(path));
    SinogramFile f;
    f.geometry = geometry_from_json(meta);
    f.noise_level = meta.value("noise_level", 0.0);
    f.seed = meta.value("seed", std::uint64_t{0});
    f.y = Sinogram(f.geometry.n_angles, f.geometry.n_det);
    f.y.data = read_f32(path, f.y.size());
    return f;
}

} // namespace dgct
