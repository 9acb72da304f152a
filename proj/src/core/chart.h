#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frame.h"
#include "kinematics.h"
#include "raster.h"

namespace aimtrace {

// Attribute channels a time-series panel can plot. The windowed means use
// the same trailing window as acc_w / prec_w.
enum class Channel { Dx, Dy, MeanDx, MeanDy, R, Amag, AccW, PrecW };

Channel channel_from_name(const std::string& name);
const char* channel_name(Channel channel);

// Panel styling. Defaults come from the Okabe-Ito colorblind-safe palette;
// everything is overridable through the style json.
struct Style {
    Rgb background{16, 20, 24};
    Rgb panel_frame{58, 64, 72};
    Rgb grid{44, 50, 58};
    Rgb text{232, 232, 232};
    Rgb series{86, 180, 233};    // sky blue
    Rgb accent{230, 159, 0};     // orange
    Rgb emphasis{0, 158, 115};   // bluish green
    Rgb trail_old{153, 153, 153};
    Rgb stale{120, 120, 120};
    int font_scale = 1;

    static Style from_json_file(const std::string& path);
    static Style from_json_text(const std::string& text, const std::string& context);
};

struct TimeseriesPanel {
    int w = 0, h = 0;
    Channel channel = Channel::R;
    double span_s = 5.0;   // visible trailing time span
    double y_min = 0.0;    // per-clip fixed scale (precomputed)
    double y_max = 1.0;
    double mean_window_s = 1.0;
    Style style;
};

struct PolarPanel {
    int w = 0, h = 0;
    double max_radius = 1.0;  // data units at the outer ring
    double trail_s = 1.0;     // recent-trail window
    Style style;
};

struct TextPanel {
    int w = 0, h = 0;
    Style style;
};

struct OverlaySpec {
    int target_radius_px = 14;
    int crosshair_px = 9;
    double on_target_radius = 6.0;  // emphasis when r <= this
    Style style;
};

// Fixed y-scale for a channel over the whole clip, padded a little so the
// polyline never touches the panel frame. Identical samples always render
// identically; only the time cursor moves.
struct ChannelScale {
    double min = 0.0;
    double max = 1.0;
};
ChannelScale compute_channel_scale(std::span<const AimSample> series, Channel channel,
                                   double mean_window_s);

double channel_value(std::span<const AimSample> series, size_t index, Channel channel,
                     double mean_window_s);

Frame render_timeseries(const TimeseriesPanel& panel, std::span<const AimSample> series,
                        int64_t now_index);

Frame render_polar(const PolarPanel& panel, std::span<const AimSample> series,
                   int64_t now_index);

// The text block of the stabilized view. Formatting contract: one decimal,
// signed position components.
std::vector<std::string> text_panel_lines(const AimSample& sample, int shots_so_far);
Frame render_text_panel(const TextPanel& panel, const AimSample& sample, int shots_so_far);

// Target circle at the tracked center plus aimpoint crosshair, drawn in
// place on an Rgb24 frame. Lost tracks render in the stale color.
void draw_overlays(Frame& frame, const OverlaySpec& spec, const AimSample& sample,
                   const TrackPoint& track, Vec2 aimpoint);

}  // namespace aimtrace
