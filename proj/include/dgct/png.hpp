#pragma once

// 16-bit greyscale PNG export for viewing. Needs libpng at link time.

#include <algorithm>
#include <cstdio>
#include <vector>

#include <png.h>

#include "io.hpp"

namespace dgct {

/// Maps [lo, hi] linearly onto [0, 65535]; values outside are clipped.
inline void write_png16(const fs::path& path, const Image& x, double lo = 0.0, double hi = 1.0)
{
    detail::require_domain(hi > lo, "write_png16: empty intensity window");
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp)
        throw IoError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng failed writing " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, x.side, x.side, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<unsigned char> row(2 * static_cast<std::size_t>(x.side));
    for (int r = 0; r < x.side; ++r) {
        for (int c = 0; c < x.side; ++c) {
            const double t = std::clamp((x(r, c) - lo) / (hi - lo), 0.0, 1.0);
            const auto v = static_cast<unsigned>(t * 65535.0 + 0.5);
            row[2 * c] = static_cast<unsigned char>(v >> 8); // PNG samples are big-endian
            row[2 * c + 1] = static_cast<unsigned char>(v & 0xff);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

} // namespace dgct
