#pragma once

#include <span>
#include <string_view>

#include "frame.h"

namespace aimtrace {

// Integer drawing primitives over an Rgb24 frame. Everything clips at the
// frame edge and rounds the same way on every platform, which is what keeps
// golden-image tests byte-stable.
class Canvas {
public:
    explicit Canvas(Frame& frame);

    int width() const { return frame_.width; }
    int height() const { return frame_.height; }

    void fill(Rgb c);
    void set(int x, int y, Rgb c) {
        if (x >= 0 && x < frame_.width && y >= 0 && y < frame_.height) frame_.set_rgb(x, y, c);
    }
    void hline(int x0, int x1, int y, Rgb c);
    void vline(int x, int y0, int y1, Rgb c);
    void rect(int x, int y, int w, int h, Rgb c);       // 1 px outline
    void fill_rect(int x, int y, int w, int h, Rgb c);
    void line(int x0, int y0, int x1, int y1, Rgb c);   // Bresenham
    void circle(int cx, int cy, int radius, Rgb c);     // midpoint outline
    void polyline(std::span<const Vec2> pts, Rgb c);

    // Dashes measured along the arc length: `on` pixels drawn, `off` skipped.
    void dashed_polyline(std::span<const Vec2> pts, Rgb c, int on = 4, int off = 4);

    // 5x7 bitmap font, integer scale, top-left origin. Lowercase input maps
    // to the uppercase glyphs.
    void text(int x, int y, std::string_view s, Rgb c, int scale = 1);

    static int text_width(std::string_view s, int scale = 1);
    static constexpr int kGlyphW = 5;
    static constexpr int kGlyphH = 7;
    static constexpr int kGlyphAdvance = 6;  // one column of spacing

private:
    Frame& frame_;
};

// Glyph rows for a character; 7 bytes, low 5 bits used, MSB-left.
std::span<const uint8_t, 7> font5x7_glyph(char c);

}  // namespace aimtrace
