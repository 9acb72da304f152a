#include "raster.h"

#include <algorithm>
#include <cmath>

#include "error.h"

namespace aimtrace {

Canvas::Canvas(Frame& frame) : frame_(frame) {
    if (frame.format != PixelFormat::Rgb24)
        fail(ErrorKind::Config, "canvas needs an rgb24 frame");
}

void Canvas::fill(Rgb c) {
    fill_rect(0, 0, width(), height(), c);
}

void Canvas::hline(int x0, int x1, int y, Rgb c) {
    if (x1 < x0) std::swap(x0, x1);
    for (int x = x0; x <= x1; ++x) set(x, y, c);
}

void Canvas::vline(int x, int y0, int y1, Rgb c) {
    if (y1 < y0) std::swap(y0, y1);
    for (int y = y0; y <= y1; ++y) set(x, y, c);
}

void Canvas::rect(int x, int y, int w, int h, Rgb c) {
    if (w <= 0 || h <= 0) return;
    hline(x, x + w - 1, y, c);
    hline(x, x + w - 1, y + h - 1, c);
    vline(x, y, y + h - 1, c);
    vline(x + w - 1, y, y + h - 1, c);
}

void Canvas::fill_rect(int x, int y, int w, int h, Rgb c) {
    int x0 = std::max(x, 0), y0 = std::max(y, 0);
    int x1 = std::min(x + w, width()), y1 = std::min(y + h, height());
    for (int yy = y0; yy < y1; ++yy)
        for (int xx = x0; xx < x1; ++xx) frame_.set_rgb(xx, yy, c);
}

void Canvas::line(int x0, int y0, int x1, int y1, Rgb c) {
    int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        set(x0, y0, c);
        if (x0 == x1 && y0 == y1) break;
        int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void Canvas::circle(int cx, int cy, int radius, Rgb c) {
    if (radius < 0) return;
    int x = radius, y = 0, err = 1 - radius;
    while (x >= y) {
        set(cx + x, cy + y, c);
        set(cx + y, cy + x, c);
        set(cx - y, cy + x, c);
        set(cx - x, cy + y, c);
        set(cx - x, cy - y, c);
        set(cx - y, cy - x, c);
        set(cx + y, cy - x, c);
        set(cx + x, cy - y, c);
        ++y;
        if (err < 0) {
            err += 2 * y + 1;
        } else {
            --x;
            err += 2 * (y - x) + 1;
        }
    }
}

void Canvas::polyline(std::span<const Vec2> pts, Rgb c) {
    for (size_t i = 1; i < pts.size(); ++i)
        line(int(std::lround(pts[i - 1].x)), int(std::lround(pts[i - 1].y)),
             int(std::lround(pts[i].x)), int(std::lround(pts[i].y)), c);
    if (pts.size() == 1)
        set(int(std::lround(pts[0].x)), int(std::lround(pts[0].y)), c);
}

void Canvas::dashed_polyline(std::span<const Vec2> pts, Rgb c, int on, int off) {
    if (on <= 0 || off < 0) return;
    // Walk segments keeping the dash phase across joints so the pattern is a
    // function of arc length, not of segment boundaries.
    double phase = 0.0;
    int period = on + off;
    for (size_t i = 1; i < pts.size(); ++i) {
        double x0 = pts[i - 1].x, y0 = pts[i - 1].y;
        double dx = pts[i].x - x0, dy = pts[i].y - y0;
        double len = std::hypot(dx, dy);
        int steps = std::max(1, int(std::ceil(len)));
        for (int s = 0; s <= steps; ++s) {
            double f = double(s) / steps;
            double arc = phase + f * len;
            if (std::fmod(arc, period) < on)
                set(int(std::lround(x0 + f * dx)), int(std::lround(y0 + f * dy)), c);
        }
        phase += len;
    }
}

void Canvas::text(int x, int y, std::string_view s, Rgb c, int scale) {
    if (scale < 1) scale = 1;
    int pen = x;
    for (char ch : s) {
        auto rows = font5x7_glyph(ch);
        for (int r = 0; r < kGlyphH; ++r) {
            uint8_t bits = rows[size_t(r)];
            for (int col = 0; col < kGlyphW; ++col) {
                if (!(bits & (1u << (4 - col)))) continue;
                fill_rect(pen + col * scale, y + r * scale, scale, scale, c);
            }
        }
        pen += kGlyphAdvance * scale;
    }
}

int Canvas::text_width(std::string_view s, int scale) {
    if (s.empty()) return 0;
    return (int(s.size()) * kGlyphAdvance - 1) * std::max(scale, 1);
}

}  // namespace aimtrace
