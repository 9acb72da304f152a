#include "chart.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "error.h"
#include "strfmt.h"

namespace aimtrace {

namespace {

using nlohmann::json;

Rgb rgb_from_json(const json& j, Rgb fallback, const std::string& context) {
    if (j.is_null()) return fallback;
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s.size() == 7 && s[0] == '#') {
            auto hex = [&](int pos) {
                return uint8_t(std::stoi(s.substr(size_t(pos), 2), nullptr, 16));
            };
            return {hex(1), hex(3), hex(5)};
        }
        fail(ErrorKind::Format, strfmt("%s: colors use \"#rrggbb\", got '%s'", context.c_str(),
                                       s.c_str()));
    }
    if (j.is_array() && j.size() == 3)
        return {uint8_t(j[0].get<int>()), uint8_t(j[1].get<int>()), uint8_t(j[2].get<int>())};
    fail(ErrorKind::Format, strfmt("%s: bad color value", context.c_str()));
}

double clean_zero(double v) {
    return v == 0.0 ? 0.0 : v;  // avoid "-0.0" in text output
}

}  // namespace

Channel channel_from_name(const std::string& name) {
    if (name == "dx") return Channel::Dx;
    if (name == "dy") return Channel::Dy;
    if (name == "mean_dx") return Channel::MeanDx;
    if (name == "mean_dy") return Channel::MeanDy;
    if (name == "r") return Channel::R;
    if (name == "amag") return Channel::Amag;
    if (name == "acc_w") return Channel::AccW;
    if (name == "prec_w") return Channel::PrecW;
    fail(ErrorKind::Config,
         strfmt("unknown channel '%s' (dx, dy, mean_dx, mean_dy, r, amag, acc_w, prec_w)",
                name.c_str()));
}

const char* channel_name(Channel channel) {
    switch (channel) {
        case Channel::Dx: return "dx";
        case Channel::Dy: return "dy";
        case Channel::MeanDx: return "mean_dx";
        case Channel::MeanDy: return "mean_dy";
        case Channel::R: return "r";
        case Channel::Amag: return "amag";
        case Channel::AccW: return "acc_w";
        case Channel::PrecW: return "prec_w";
    }
    return "?";
}

Style Style::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, strfmt("cannot open '%s' for reading", path.c_str()));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text, path);
}

Style Style::from_json_text(const std::string& text, const std::string& context) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Format, strfmt("bad json in %s: %s", context.c_str(), e.what()));
    }
    Style s;
    auto color = [&](const char* key, Rgb fallback) {
        return j.contains(key) ? rgb_from_json(j[key], fallback, context) : fallback;
    };
    s.background = color("background", s.background);
    s.panel_frame = color("panel_frame", s.panel_frame);
    s.grid = color("grid", s.grid);
    s.text = color("text", s.text);
    s.series = color("series", s.series);
    s.accent = color("accent", s.accent);
    s.emphasis = color("emphasis", s.emphasis);
    s.trail_old = color("trail_old", s.trail_old);
    s.stale = color("stale", s.stale);
    if (j.contains("font_scale")) s.font_scale = std::max(1, j["font_scale"].get<int>());
    return s;
}

double channel_value(std::span<const AimSample> series, size_t index, Channel channel,
                     double mean_window_s) {
    const AimSample& s = series[index];
    switch (channel) {
        case Channel::Dx: return s.dx;
        case Channel::Dy: return s.dy;
        case Channel::R: return s.r;
        case Channel::Amag: return s.amag;
        case Channel::AccW: return s.acc_w;
        case Channel::PrecW: return s.prec_w;
        case Channel::MeanDx:
        case Channel::MeanDy: {
            double sum = 0.0;
            size_t count = 0;
            for (size_t j = index + 1; j-- > 0;) {
                if (series[j].t <= s.t - mean_window_s) break;
                sum += channel == Channel::MeanDx ? series[j].dx : series[j].dy;
                ++count;
            }
            return sum / double(count);
        }
    }
    return 0.0;
}

ChannelScale compute_channel_scale(std::span<const AimSample> series, Channel channel,
                                   double mean_window_s) {
    ChannelScale scale;
    if (series.empty()) return {0.0, 1.0};
    double lo = channel_value(series, 0, channel, mean_window_s), hi = lo;
    for (size_t i = 1; i < series.size(); ++i) {
        double v = channel_value(series, i, channel, mean_window_s);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo < 1e-9) {
        scale.min = lo - 1.0;
        scale.max = hi + 1.0;
    } else {
        double pad = 0.05 * (hi - lo);
        scale.min = lo - pad;
        scale.max = hi + pad;
    }
    return scale;
}

Frame render_timeseries(const TimeseriesPanel& panel, std::span<const AimSample> series,
                        int64_t now_index) {
    if (panel.w <= 0 || panel.h <= 0) fail(ErrorKind::Config, "panel size must be positive");
    if (panel.span_s <= 0) fail(ErrorKind::Config, "panel span must be positive");
    if (now_index < 0 || size_t(now_index) >= series.size())
        fail(ErrorKind::Data, "now_index outside the series");
    if (panel.y_max <= panel.y_min) fail(ErrorKind::Config, "panel y-scale is empty");

    Frame frame = Frame::make(panel.w, panel.h, PixelFormat::Rgb24);
    Canvas canvas(frame);
    const Style& st = panel.style;
    int fs = std::max(1, st.font_scale);
    canvas.fill(st.background);

    const AimSample& now = series[size_t(now_index)];
    canvas.text(2, 2, channel_name(panel.channel), st.text, fs);
    double now_value = channel_value(series, size_t(now_index), panel.channel,
                                     panel.mean_window_s);
    std::string cur = strfmt("%.1f", clean_zero(now_value));
    canvas.text(panel.w - 2 - Canvas::text_width(cur, fs), 2, cur, st.accent, fs);

    int y0 = 2 + 8 * fs;
    int y1 = panel.h - 3;
    int x0 = 2, x1 = panel.w - 3;
    if (y1 <= y0 + 2 || x1 <= x0 + 2) return frame;  // too small for a plot
    canvas.rect(x0, y0, x1 - x0 + 1, y1 - y0 + 1, st.panel_frame);
    ++x0, ++y0, --x1, --y1;  // interior

    auto map_y = [&](double v) {
        double f = (v - panel.y_min) / (panel.y_max - panel.y_min);
        return y1 - int(std::lround(f * (y1 - y0)));
    };
    auto map_x = [&](double t) {
        double f = 1.0 - (now.t - t) / panel.span_s;
        return x0 + int(std::lround(f * (x1 - x0)));
    };

    // Whole-second ticks, then the zero gridline on top of them.
    for (double tick = std::ceil((now.t - panel.span_s) / 1.0);
         tick <= now.t + 1e-9; tick += 1.0) {
        int x = map_x(tick);
        if (x >= x0 && x <= x1) canvas.vline(x, y0, y1, st.grid);
    }
    if (panel.y_min < 0.0 && panel.y_max > 0.0) canvas.hline(x0, x1, map_y(0.0), st.grid);

    // Axis extremes.
    canvas.text(x0 + 2, y0 + 1, strfmt("%.1f", panel.y_max), st.grid, fs);
    canvas.text(x0 + 2, y1 - 7 * fs, strfmt("%.1f", panel.y_min), st.grid, fs);

    std::vector<Vec2> pts;
    for (int64_t j = now_index; j >= 0; --j) {
        if (series[size_t(j)].t <= now.t - panel.span_s) break;
        pts.push_back({double(map_x(series[size_t(j)].t)),
                       double(map_y(channel_value(series, size_t(j), panel.channel,
                                                  panel.mean_window_s)))});
    }
    std::reverse(pts.begin(), pts.end());
    canvas.polyline(pts, st.series);

    if (!pts.empty())
        canvas.fill_rect(int(pts.back().x) - fs, int(pts.back().y) - fs, 2 * fs + 1, 2 * fs + 1,
                         st.accent);
    return frame;
}

Frame render_polar(const PolarPanel& panel, std::span<const AimSample> series,
                   int64_t now_index) {
    if (panel.w <= 0 || panel.h <= 0) fail(ErrorKind::Config, "panel size must be positive");
    if (panel.max_radius <= 0) fail(ErrorKind::Config, "polar max_radius must be positive");
    if (now_index < 0 || size_t(now_index) >= series.size())
        fail(ErrorKind::Data, "now_index outside the series");

    Frame frame = Frame::make(panel.w, panel.h, PixelFormat::Rgb24);
    Canvas canvas(frame);
    const Style& st = panel.style;
    int fs = std::max(1, st.font_scale);
    canvas.fill(st.background);

    int cx = panel.w / 2, cy = panel.h / 2;
    int radius = std::max(4, std::min(panel.w, panel.h) / 2 - 8 * fs - 2);

    canvas.hline(cx - radius, cx + radius, cy, st.grid);
    canvas.vline(cx, cy - radius, cy + radius, st.grid);
    canvas.circle(cx, cy, radius / 3, st.grid);
    canvas.circle(cx, cy, 2 * radius / 3, st.grid);
    canvas.circle(cx, cy, radius, st.panel_frame);
    std::string label = strfmt("%.1f", panel.max_radius);
    canvas.text(cx - Canvas::text_width(label, fs) / 2, cy + radius + 2, label, st.grid, fs);

    auto map_pt = [&](const AimSample& s) {
        double r = std::hypot(s.dx, s.dy);
        double scale = double(radius) / panel.max_radius;
        if (r > panel.max_radius) scale *= panel.max_radius / r;  // clamp to the rim
        return Vec2{cx + s.dx * scale, cy + s.dy * scale};
    };

    const AimSample& now = series[size_t(now_index)];
    std::vector<Vec2> old_pts, recent_pts;
    for (int64_t j = 0; j <= now_index; ++j) {
        const AimSample& s = series[size_t(j)];
        if (s.t <= now.t - panel.trail_s)
            old_pts.push_back(map_pt(s));
        else
            recent_pts.push_back(map_pt(s));
    }
    if (!old_pts.empty() && !recent_pts.empty())
        old_pts.push_back(recent_pts.front());  // keep the trail connected
    canvas.dashed_polyline(old_pts, st.trail_old);
    canvas.polyline(recent_pts, st.series);

    Vec2 cur = map_pt(now);
    int px = int(std::lround(cur.x)), py = int(std::lround(cur.y));
    canvas.fill_rect(px - fs, py - fs, 2 * fs + 1, 2 * fs + 1, st.emphasis);
    canvas.circle(px, py, 3 * fs, st.accent);
    return frame;
}

std::vector<std::string> text_panel_lines(const AimSample& sample, int shots_so_far) {
    std::vector<std::string> lines;
    lines.push_back(strfmt("pos: %+.1f, %+.1f", clean_zero(sample.dx), clean_zero(sample.dy)));
    lines.push_back(strfmt("dist: %.1f", clean_zero(sample.r)));
    lines.push_back(strfmt("acc: %.1f", clean_zero(sample.acc_w)));
    lines.push_back(strfmt("prec: %.1f", clean_zero(sample.prec_w)));
    lines.push_back(strfmt("shots: %d", shots_so_far));
    lines.push_back(strfmt("time: %.1f s", clean_zero(sample.t)));
    return lines;
}

Frame render_text_panel(const TextPanel& panel, const AimSample& sample, int shots_so_far) {
    if (panel.w <= 0 || panel.h <= 0) fail(ErrorKind::Config, "panel size must be positive");
    Frame frame = Frame::make(panel.w, panel.h, PixelFormat::Rgb24);
    Canvas canvas(frame);
    const Style& st = panel.style;
    int fs = std::max(1, st.font_scale);
    canvas.fill(st.background);
    canvas.rect(0, 0, panel.w, panel.h, st.panel_frame);
    int y = 6;
    for (const std::string& line : text_panel_lines(sample, shots_so_far)) {
        canvas.text(6, y, line, st.text, fs);
        y += 10 * fs;
    }
    return frame;
}

void draw_overlays(Frame& frame, const OverlaySpec& spec, const AimSample& sample,
                   const TrackPoint& track, Vec2 aimpoint) {
    Canvas canvas(frame);
    const Style& st = spec.style;
    int tx = int(std::lround(track.x)), ty = int(std::lround(track.y));
    Rgb target_color = st.accent;
    if (track.status == TrackStatus::Lost)
        target_color = st.stale;
    else if (sample.r <= spec.on_target_radius)
        target_color = st.emphasis;
    canvas.circle(tx, ty, spec.target_radius_px, target_color);
    if (track.status == TrackStatus::Lost)
        canvas.circle(tx, ty, spec.target_radius_px - 2, st.stale);  // doubled ring marks stale

    int ax = int(std::lround(aimpoint.x)), ay = int(std::lround(aimpoint.y));
    int c = spec.crosshair_px;
    canvas.hline(ax - c, ax - 2, ay, st.text);
    canvas.hline(ax + 2, ax + c, ay, st.text);
    canvas.vline(ax, ay - c, ay - 2, st.text);
    canvas.vline(ax, ay + 2, ay + c, st.text);
}

}  // namespace aimtrace
