#include "frame.h"

#include <algorithm>

#include "error.h"
#include "strfmt.h"

namespace aimtrace {

const char* pixel_format_name(PixelFormat format) {
    switch (format) {
        case PixelFormat::Gray8: return "gray8";
        case PixelFormat::Rgb24: return "rgb24";
        case PixelFormat::Yuv420: return "yuv420";
    }
    return "?";
}

Frame Frame::make(int width, int height, PixelFormat format) {
    if (width <= 0 || height <= 0)
        fail(ErrorKind::Config, strfmt("frame dimensions must be positive, got %dx%d", width, height));
    if (format == PixelFormat::Yuv420 && (width % 2 || height % 2))
        fail(ErrorKind::Config, strfmt("yuv420 needs even dimensions, got %dx%d", width, height));
    Frame f;
    f.width = width;
    f.height = height;
    f.format = format;
    for (int p = 0; p < f.plane_count(); ++p)
        f.plane[p].assign(f.plane_size(p), 0);
    return f;
}

int Frame::plane_count() const {
    return format == PixelFormat::Yuv420 ? 3 : 1;
}

size_t Frame::plane_size(int p) const {
    size_t luma = size_t(width) * height;
    switch (format) {
        case PixelFormat::Gray8: return p == 0 ? luma : 0;
        case PixelFormat::Rgb24: return p == 0 ? luma * 3 : 0;
        case PixelFormat::Yuv420: return p == 0 ? luma : luma / 4;
    }
    return 0;
}

bool Frame::layout_ok() const {
    if (width <= 0 || height <= 0) return false;
    if (format == PixelFormat::Yuv420 && (width % 2 || height % 2)) return false;
    for (int p = 0; p < 3; ++p) {
        size_t want = p < plane_count() ? plane_size(p) : 0;
        if (plane[p].size() != want) return false;
    }
    return true;
}

void ClipHeader::validate() const {
    if (width <= 0 || height <= 0)
        fail(ErrorKind::Config, strfmt("clip dimensions must be positive, got %dx%d", width, height));
    if (fps_num <= 0 || fps_den <= 0)
        fail(ErrorKind::Config, strfmt("frame rate must be positive, got %d:%d", fps_num, fps_den));
    if (format == PixelFormat::Yuv420 && (width % 2 || height % 2))
        fail(ErrorKind::Config, strfmt("yuv420 needs even dimensions, got %dx%d", width, height));
}

uint8_t luma_of(Rgb c) {
    return uint8_t((77 * c.r + 150 * c.g + 29 * c.b + 128) >> 8);
}

namespace {

uint8_t clamp_u8(int v) {
    return uint8_t(std::clamp(v, 0, 255));
}

Frame copy_shell(const Frame& src, PixelFormat format) {
    Frame out = Frame::make(src.width, src.height, format);
    out.index = src.index;
    out.pts_seconds = src.pts_seconds;
    return out;
}

}  // namespace

Frame to_gray(const Frame& frame) {
    switch (frame.format) {
        case PixelFormat::Gray8:
            return frame;
        case PixelFormat::Yuv420: {
            Frame out = copy_shell(frame, PixelFormat::Gray8);
            out.plane[0] = frame.plane[0];
            return out;
        }
        case PixelFormat::Rgb24: {
            Frame out = copy_shell(frame, PixelFormat::Gray8);
            const uint8_t* src = frame.plane[0].data();
            uint8_t* dst = out.plane[0].data();
            size_t n = size_t(frame.width) * frame.height;
            for (size_t i = 0; i < n; ++i, src += 3)
                dst[i] = uint8_t((77 * src[0] + 150 * src[1] + 29 * src[2] + 128) >> 8);
            return out;
        }
    }
    fail(ErrorKind::Internal, "unreachable pixel format");
}

Frame to_rgb(const Frame& frame) {
    switch (frame.format) {
        case PixelFormat::Rgb24:
            return frame;
        case PixelFormat::Gray8: {
            Frame out = copy_shell(frame, PixelFormat::Rgb24);
            const uint8_t* src = frame.plane[0].data();
            uint8_t* dst = out.plane[0].data();
            size_t n = size_t(frame.width) * frame.height;
            for (size_t i = 0; i < n; ++i) {
                dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
            }
            return out;
        }
        case PixelFormat::Yuv420: {
            // Full-range integer BT.601: R = Y + 1.402 Cr', G = Y - 0.344 Cb'
            // - 0.714 Cr', B = Y + 1.772 Cb' with coefficients scaled by 256.
            Frame out = copy_shell(frame, PixelFormat::Rgb24);
            int w = frame.width, h = frame.height;
            int cw = w / 2;
            const uint8_t* yp = frame.plane[0].data();
            const uint8_t* up = frame.plane[1].data();
            const uint8_t* vp = frame.plane[2].data();
            uint8_t* dst = out.plane[0].data();
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    int Y = yp[size_t(y) * w + x];
                    int cb = up[size_t(y / 2) * cw + x / 2] - 128;
                    int cr = vp[size_t(y / 2) * cw + x / 2] - 128;
                    size_t i = (size_t(y) * w + x) * 3;
                    dst[i] = clamp_u8(Y + ((359 * cr + 128) >> 8));
                    dst[i + 1] = clamp_u8(Y - ((88 * cb + 183 * cr + 128) >> 8));
                    dst[i + 2] = clamp_u8(Y + ((454 * cb + 128) >> 8));
                }
            }
            return out;
        }
    }
    fail(ErrorKind::Internal, "unreachable pixel format");
}

Frame rgb_to_yuv420(const Frame& frame) {
    if (frame.format != PixelFormat::Rgb24)
        fail(ErrorKind::Config, "rgb_to_yuv420 expects an rgb24 frame");
    if (frame.width % 2 || frame.height % 2)
        fail(ErrorKind::Config,
             strfmt("yuv420 needs even dimensions, got %dx%d", frame.width, frame.height));
    Frame out = copy_shell(frame, PixelFormat::Yuv420);
    int w = frame.width, h = frame.height;
    int cw = w / 2, ch = h / 2;
    const uint8_t* src = frame.plane[0].data();
    uint8_t* yp = out.plane[0].data();

    // Full-range integer BT.601 (JPEG style), chroma averaged over 2x2.
    std::vector<int> cb(size_t(w) * h), cr(size_t(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t i = size_t(y) * w + x;
            int r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
            yp[i] = uint8_t((77 * r + 150 * g + 29 * b + 128) >> 8);
            cb[i] = ((-43 * r - 85 * g + 128 * b + 128) >> 8) + 128;
            cr[i] = ((128 * r - 107 * g - 21 * b + 128) >> 8) + 128;
        }
    }
    uint8_t* up = out.plane[1].data();
    uint8_t* vp = out.plane[2].data();
    for (int y = 0; y < ch; ++y) {
        for (int x = 0; x < cw; ++x) {
            size_t i00 = size_t(2 * y) * w + 2 * x;
            size_t i10 = i00 + w;
            up[size_t(y) * cw + x] = clamp_u8((cb[i00] + cb[i00 + 1] + cb[i10] + cb[i10 + 1] + 2) >> 2);
            vp[size_t(y) * cw + x] = clamp_u8((cr[i00] + cr[i00 + 1] + cr[i10] + cr[i10 + 1] + 2) >> 2);
        }
    }
    return out;
}

Frame convert(const Frame& frame, PixelFormat target) {
    if (frame.format == target) return frame;
    switch (target) {
        case PixelFormat::Gray8: return to_gray(frame);
        case PixelFormat::Rgb24: return to_rgb(frame);
        case PixelFormat::Yuv420: return rgb_to_yuv420(to_rgb(frame));
    }
    fail(ErrorKind::Internal, "unreachable pixel format");
}

Frame translate_frame(const Frame& frame, int sx, int sy, Rgb fill) {
    if (frame.format == PixelFormat::Yuv420)
        return rgb_to_yuv420(translate_frame(to_rgb(frame), sx, sy, fill));
    Frame out = copy_shell(frame, frame.format);
    int w = frame.width, h = frame.height;
    bool gray = frame.format == PixelFormat::Gray8;
    uint8_t fill_luma = luma_of(fill);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int ox = x - sx, oy = y - sy;
            bool inside = ox >= 0 && ox < w && oy >= 0 && oy < h;
            if (gray)
                out.gray_at(x, y) = inside ? frame.gray_at(ox, oy) : fill_luma;
            else
                out.set_rgb(x, y, inside ? frame.rgb_at(ox, oy) : fill);
        }
    }
    return out;
}

uint64_t frame_digest(const Frame& frame, uint64_t seed) {
    uint64_t h = seed;
    auto mix = [&h](uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ull;
        }
    };
    mix(uint64_t(frame.width));
    mix(uint64_t(frame.height));
    mix(uint64_t(frame.format));
    for (int p = 0; p < frame.plane_count(); ++p) {
        for (uint8_t byte : frame.plane[p]) {
            h ^= byte;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

uint64_t clip_digest(const Clip& clip) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const Frame& f : clip.frames) h = frame_digest(f, h);
    return h;
}

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io: return "io";
        case ErrorKind::Format: return "format";
        case ErrorKind::Data: return "data";
        case ErrorKind::Config: return "config";
        case ErrorKind::Geometry: return "geometry";
        case ErrorKind::Unsupported: return "unsupported";
        case ErrorKind::Internal: return "internal";
    }
    return "?";
}

}  // namespace aimtrace
