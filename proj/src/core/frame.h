#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace aimtrace {

enum class PixelFormat { Gray8, Rgb24, Yuv420 };

const char* pixel_format_name(PixelFormat format);

struct Rgb {
    uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct Rect {
    int x = 0, y = 0, w = 0, h = 0;
    bool contains(const Rect& inner) const {
        return inner.x >= x && inner.y >= y && inner.x + inner.w <= x + w &&
               inner.y + inner.h <= y + h;
    }
};

// A single raster image plus its position in the clip.
//
// Plane layout by format:
//   Gray8:  plane 0, width*height luma samples
//   Rgb24:  plane 0, width*height*3 interleaved RGB
//   Yuv420: planes 0..2 (Y, Cb, Cr), chroma at half resolution; width and
//           height must be even
struct Frame {
    int width = 0;
    int height = 0;
    PixelFormat format = PixelFormat::Gray8;
    int64_t index = 0;
    double pts_seconds = 0.0;
    std::array<std::vector<uint8_t>, 3> plane;

    static Frame make(int width, int height, PixelFormat format);

    int plane_count() const;
    size_t plane_size(int p) const;  // size required by the layout
    bool layout_ok() const;

    uint8_t gray_at(int x, int y) const { return plane[0][size_t(y) * width + x]; }
    uint8_t& gray_at(int x, int y) { return plane[0][size_t(y) * width + x]; }
    Rgb rgb_at(int x, int y) const {
        size_t i = (size_t(y) * width + x) * 3;
        return {plane[0][i], plane[0][i + 1], plane[0][i + 2]};
    }
    void set_rgb(int x, int y, Rgb c) {
        size_t i = (size_t(y) * width + x) * 3;
        plane[0][i] = c.r;
        plane[0][i + 1] = c.g;
        plane[0][i + 2] = c.b;
    }

    bool same_pixels(const Frame& other) const {
        return width == other.width && height == other.height &&
               format == other.format && plane == other.plane;
    }
};

struct ClipHeader {
    int width = 0;
    int height = 0;
    int fps_num = 30;
    int fps_den = 1;
    PixelFormat format = PixelFormat::Yuv420;
    std::optional<int64_t> frame_count;  // unknown for streams

    double fps() const { return double(fps_num) / double(fps_den); }
    double frame_time(int64_t index) const {
        return double(index) * fps_den / fps_num;
    }
    void validate() const;  // throws Error(Config) on bad fields
};

struct Clip {
    ClipHeader header;
    std::vector<Frame> frames;
};

// Luma extraction. Gray8 passes through, Yuv420 takes the Y plane verbatim,
// Rgb24 uses integer rec.601 weights: (77R + 150G + 29B + 128) >> 8.
Frame to_gray(const Frame& frame);

Frame to_rgb(const Frame& frame);
Frame rgb_to_yuv420(const Frame& frame);
Frame convert(const Frame& frame, PixelFormat target);

// Translates content by (sx, sy) pixels; uncovered pixels get `fill`
// (Gray8 frames use the rec.601 luma of `fill`).
Frame translate_frame(const Frame& frame, int sx, int sy, Rgb fill);

uint8_t luma_of(Rgb c);

// FNV-1a 64 over plane bytes plus dimensions; used for determinism checks.
uint64_t frame_digest(const Frame& frame, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t clip_digest(const Clip& clip);

}  // namespace aimtrace
