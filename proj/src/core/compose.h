#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chart.h"
#include "frame.h"
#include "kinematics.h"
#include "tracker.h"

namespace aimtrace {

enum class VisId { Vis1 = 1, Vis2, Vis3, Vis4, Vis5 };

VisId vis_from_int(int v);

// A composite layout: named slots blitted onto a fixed canvas in z order.
// Slot names are "video" for the clip frame and "panel:<name>" for rendered
// panels.
struct Placement {
    std::string slot;
    Rect dst;
    int z = 0;
};

struct LayoutPreset {
    VisId id = VisId::Vis1;
    int canvas_w = 0;
    int canvas_h = 0;
    Rgb background{16, 20, 24};
    std::vector<Placement> placements;

    // Destination rects inside the canvas, no same-z overlap; the video slot
    // keeps the source aspect ratio.
    void validate(int src_w, int src_h) const;

    static LayoutPreset from_json_file(const std::string& path);
    static LayoutPreset from_json_text(const std::string& text, const std::string& context);
    std::string to_json_text() const;
};

// The shipped geometry, parameterized by source size. Vis5 uses a canvas of
// 1.75x the source width at source height.
LayoutPreset default_layout(VisId id, int src_w, int src_h);

// Background fill, then inputs blitted in ascending z. Throws
// Error(Data) naming the slot on a missing input or size mismatch.
Frame compose_frame(const LayoutPreset& preset, const std::map<std::string, const Frame*>& inputs);

struct RenderConfig {
    Style style;
    std::optional<LayoutPreset> layout;      // default geometry when absent
    std::optional<Vec2> aimpoint;            // default frame center
    double timeseries_span_s = 5.0;
    double mean_window_s = 1.0;
    double polar_max_radius = 0.0;           // <= 0: auto from the series
    double polar_trail_s = 1.0;
    OverlaySpec overlays;
    std::vector<Channel> vis3_channels = {Channel::Dx,    Channel::Dy,   Channel::MeanDx,
                                          Channel::MeanDy, Channel::R,    Channel::Amag,
                                          Channel::AccW,   Channel::PrecW};
};

// Per-frame composite renderer. Construction precomputes everything that
// must stay constant over the clip (axis scales, layout, stabilization
// shifts) so render_frame stays pure and parallelizable.
class VisualizationRenderer {
public:
    VisualizationRenderer(VisId id, const ClipHeader& src_header,
                          std::span<const TrackPoint> track, std::span<const AimSample> series,
                          std::span<const ShotEvent> shots, const RenderConfig& cfg);

    const ClipHeader& output_header() const { return out_header_; }
    const LayoutPreset& layout() const { return layout_; }

    // `src` must be the clip frame with index == src.index. Vis1 passes the
    // frame through untouched; the other presets return Rgb24 canvases.
    Frame render_frame(const Frame& src) const;

private:
    VisId id_;
    ClipHeader src_header_;
    ClipHeader out_header_;
    std::vector<TrackPoint> track_;
    std::vector<AimSample> series_;
    std::vector<ShotEvent> shots_;
    std::vector<StabilizationOffset> stab_;
    RenderConfig cfg_;
    LayoutPreset layout_;
    std::map<std::string, ChannelScale> scales_;
    double polar_max_radius_ = 1.0;
    Vec2 aimpoint_{};
};

std::vector<Frame> render_visualization(VisId id, const Clip& clip,
                                        std::span<const TrackPoint> track,
                                        std::span<const AimSample> series,
                                        std::span<const ShotEvent> shots,
                                        const RenderConfig& cfg);

}  // namespace aimtrace
