#include "compose.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "error.h"
#include "strfmt.h"

namespace aimtrace {

namespace {

using nlohmann::json;

int round_even(double v) {
    int n = int(std::lround(v));
    return n + (n % 2);
}

bool rects_overlap(const Rect& a, const Rect& b) {
    return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

// Blit src into dst at (dx, dy); src converted to rgb on the fly.
void blit(Frame& dst, const Frame& src, int dx, int dy) {
    Frame rgb = src.format == PixelFormat::Rgb24 ? src : to_rgb(src);
    for (int y = 0; y < rgb.height; ++y) {
        int ty = dy + y;
        if (ty < 0 || ty >= dst.height) continue;
        for (int x = 0; x < rgb.width; ++x) {
            int tx = dx + x;
            if (tx < 0 || tx >= dst.width) continue;
            dst.set_rgb(tx, ty, rgb.rgb_at(x, y));
        }
    }
}

}  // namespace

VisId vis_from_int(int v) {
    if (v < 1 || v > 5) fail(ErrorKind::Config, strfmt("vis preset must be 1..5, got %d", v));
    return VisId(v);
}

void LayoutPreset::validate(int src_w, int src_h) const {
    if (canvas_w <= 0 || canvas_h <= 0)
        fail(ErrorKind::Data, strfmt("layout canvas must be positive, got %dx%d", canvas_w, canvas_h));
    Rect canvas{0, 0, canvas_w, canvas_h};
    for (size_t i = 0; i < placements.size(); ++i) {
        const Placement& p = placements[i];
        if (p.dst.w <= 0 || p.dst.h <= 0)
            fail(ErrorKind::Data, strfmt("layout slot '%s' has empty size", p.slot.c_str()));
        if (!canvas.contains(p.dst))
            fail(ErrorKind::Data,
                 strfmt("layout slot '%s' (%d,%d %dx%d) leaves the %dx%d canvas", p.slot.c_str(),
                        p.dst.x, p.dst.y, p.dst.w, p.dst.h, canvas_w, canvas_h));
        if (p.slot == "video" && (p.dst.w != src_w || p.dst.h != src_h))
            fail(ErrorKind::Data,
                 strfmt("video slot is %dx%d but the source is %dx%d (no rescaling)", p.dst.w,
                        p.dst.h, src_w, src_h));
        for (size_t j = i + 1; j < placements.size(); ++j) {
            if (placements[j].z != p.z) continue;
            if (rects_overlap(p.dst, placements[j].dst))
                fail(ErrorKind::Data,
                     strfmt("layout slots '%s' and '%s' overlap at z=%d", p.slot.c_str(),
                            placements[j].slot.c_str(), p.z));
        }
    }
}

LayoutPreset LayoutPreset::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, strfmt("cannot open '%s' for reading", path.c_str()));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text, path);
}

LayoutPreset LayoutPreset::from_json_text(const std::string& text, const std::string& context) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Format, strfmt("bad json in %s: %s", context.c_str(), e.what()));
    }
    LayoutPreset preset;
    try {
        preset.id = vis_from_int(j.value("vis", 1));
        preset.canvas_w = j.at("canvas").at("w").get<int>();
        preset.canvas_h = j.at("canvas").at("h").get<int>();
        if (j.contains("background")) {
            std::string s = j["background"].get<std::string>();
            if (s.size() != 7 || s[0] != '#')
                fail(ErrorKind::Format, strfmt("%s: background uses \"#rrggbb\"", context.c_str()));
            preset.background = {uint8_t(std::stoi(s.substr(1, 2), nullptr, 16)),
                                 uint8_t(std::stoi(s.substr(3, 2), nullptr, 16)),
                                 uint8_t(std::stoi(s.substr(5, 2), nullptr, 16))};
        }
        for (const json& pj : j.at("placements")) {
            Placement p;
            p.slot = pj.at("slot").get<std::string>();
            p.dst = {pj.at("x").get<int>(), pj.at("y").get<int>(), pj.at("w").get<int>(),
                     pj.at("h").get<int>()};
            p.z = pj.value("z", 0);
            preset.placements.push_back(p);
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::Format, strfmt("bad layout in %s: %s", context.c_str(), e.what()));
    }
    return preset;
}

std::string LayoutPreset::to_json_text() const {
    json j;
    j["vis"] = int(id);
    j["canvas"] = {{"w", canvas_w}, {"h", canvas_h}};
    j["background"] = strfmt("#%02x%02x%02x", background.r, background.g, background.b);
    j["placements"] = json::array();
    for (const Placement& p : placements)
        j["placements"].push_back({{"slot", p.slot},
                                   {"x", p.dst.x},
                                   {"y", p.dst.y},
                                   {"w", p.dst.w},
                                   {"h", p.dst.h},
                                   {"z", p.z}});
    return j.dump(2);
}

LayoutPreset default_layout(VisId id, int src_w, int src_h) {
    LayoutPreset preset;
    preset.id = id;
    switch (id) {
        case VisId::Vis1:
            preset.canvas_w = src_w;
            preset.canvas_h = src_h;
            preset.placements.push_back({"video", {0, 0, src_w, src_h}, 0});
            break;
        case VisId::Vis2: {
            int panel_w = round_even(src_w / 2.0);
            preset.canvas_w = src_w + panel_w;
            preset.canvas_h = src_h;
            preset.placements.push_back({"panel:text", {0, 0, panel_w, src_h}, 0});
            preset.placements.push_back({"video", {panel_w, 0, src_w, src_h}, 0});
            break;
        }
        case VisId::Vis3: {
            preset.canvas_w = src_w;
            preset.canvas_h = src_h;
            // 2 x 4 grid of time-series cells, filled row-major.
            int cols = 2, rows = 4;
            int cell_w = src_w / cols, cell_h = src_h / rows;
            for (int k = 0; k < cols * rows; ++k)
                preset.placements.push_back({strfmt("panel:ts%d", k),
                                             {(k % cols) * cell_w, (k / cols) * cell_h, cell_w,
                                              cell_h},
                                             0});
            break;
        }
        case VisId::Vis4:
            preset.canvas_w = src_w;
            preset.canvas_h = src_h;
            preset.placements.push_back({"panel:polar", {0, 0, src_w, src_h}, 0});
            break;
        case VisId::Vis5: {
            preset.canvas_w = round_even(1.75 * src_w);
            preset.canvas_h = src_h;
            int left_w = preset.canvas_w - src_w;
            int ts_h = src_h / 6;
            for (int k = 0; k < 3; ++k)
                preset.placements.push_back(
                    {strfmt("panel:ts%d", k), {0, k * ts_h, left_w, ts_h}, 0});
            preset.placements.push_back(
                {"panel:polar", {0, 3 * ts_h, left_w, src_h - 3 * ts_h}, 0});
            preset.placements.push_back({"video", {left_w, 0, src_w, src_h}, 0});
            break;
        }
    }
    preset.validate(src_w, src_h);
    return preset;
}

Frame compose_frame(const LayoutPreset& preset, const std::map<std::string, const Frame*>& inputs) {
    Frame canvas = Frame::make(preset.canvas_w, preset.canvas_h, PixelFormat::Rgb24);
    Canvas painter(canvas);
    painter.fill(preset.background);

    std::vector<const Placement*> order;
    for (const Placement& p : preset.placements) order.push_back(&p);
    std::stable_sort(order.begin(), order.end(),
                     [](const Placement* a, const Placement* b) { return a->z < b->z; });

    for (const Placement* p : order) {
        auto it = inputs.find(p->slot);
        if (it == inputs.end() || !it->second)
            fail(ErrorKind::Data, strfmt("compose: no input for slot '%s'", p->slot.c_str()));
        const Frame& input = *it->second;
        if (input.width != p->dst.w || input.height != p->dst.h)
            fail(ErrorKind::Data,
                 strfmt("compose: slot '%s' expects %dx%d, got %dx%d", p->slot.c_str(), p->dst.w,
                        p->dst.h, input.width, input.height));
        blit(canvas, input, p->dst.x, p->dst.y);
    }
    return canvas;
}

VisualizationRenderer::VisualizationRenderer(VisId id, const ClipHeader& src_header,
                                             std::span<const TrackPoint> track,
                                             std::span<const AimSample> series,
                                             std::span<const ShotEvent> shots,
                                             const RenderConfig& cfg)
    : id_(id),
      src_header_(src_header),
      track_(track.begin(), track.end()),
      series_(series.begin(), series.end()),
      shots_(shots.begin(), shots.end()),
      cfg_(cfg) {
    src_header_.validate();
    if (id_ != VisId::Vis1) {
        if (series_.empty()) fail(ErrorKind::Data, "render: empty metrics series");
        if (track_.size() != series_.size())
            fail(ErrorKind::Data, strfmt("render: track has %zu rows, series %zu",
                                         track_.size(), series_.size()));
    }

    layout_ = cfg_.layout ? *cfg_.layout : default_layout(id_, src_header_.width, src_header_.height);
    if (layout_.id != id_)
        fail(ErrorKind::Config, strfmt("layout file is for vis %d, requested vis %d",
                                       int(layout_.id), int(id_)));
    layout_.validate(src_header_.width, src_header_.height);
    aimpoint_ = cfg_.aimpoint.value_or(Vec2{src_header_.width / 2.0, src_header_.height / 2.0});

    stab_ = stabilization_offsets(track_, src_header_);

    // Per-clip constants: axis scales per channel and the polar radius.
    auto scale_for = [this](Channel ch) {
        std::string key = channel_name(ch);
        if (!scales_.count(key))
            scales_[key] = compute_channel_scale(series_, ch, cfg_.mean_window_s);
    };
    if (id_ == VisId::Vis3)
        for (Channel ch : cfg_.vis3_channels) scale_for(ch);
    if (id_ == VisId::Vis5)
        for (Channel ch : {Channel::AccW, Channel::PrecW, Channel::Amag}) scale_for(ch);
    if (id_ == VisId::Vis4 || id_ == VisId::Vis5) {
        if (cfg_.polar_max_radius > 0) {
            polar_max_radius_ = cfg_.polar_max_radius;
        } else {
            double max_r = 1.0;
            for (const AimSample& s : series_) max_r = std::max(max_r, s.r);
            polar_max_radius_ = std::ceil(max_r) + 1.0;
        }
    }

    out_header_ = src_header_;
    if (id_ != VisId::Vis1) {
        out_header_.width = layout_.canvas_w;
        out_header_.height = layout_.canvas_h;
        out_header_.format = PixelFormat::Rgb24;
    }
}

Frame VisualizationRenderer::render_frame(const Frame& src) const {
    if (id_ == VisId::Vis1) return src;  // raw footage passes through untouched

    int64_t i = src.index;
    if (i < 0 || size_t(i) >= series_.size())
        fail(ErrorKind::Data, strfmt("render: frame %lld outside the %zu-row series",
                                     (long long)i, series_.size()));
    const AimSample& sample = series_[size_t(i)];
    int shots_so_far = 0;
    for (const ShotEvent& e : shots_)
        if (e.frame_index <= i) ++shots_so_far;

    std::map<std::string, Frame> rendered;
    auto ts_panel = [&](const Placement& p, Channel ch) {
        TimeseriesPanel panel;
        panel.w = p.dst.w;
        panel.h = p.dst.h;
        panel.channel = ch;
        panel.span_s = cfg_.timeseries_span_s;
        panel.mean_window_s = cfg_.mean_window_s;
        auto scale = scales_.at(channel_name(ch));
        panel.y_min = scale.min;
        panel.y_max = scale.max;
        panel.style = cfg_.style;
        rendered[p.slot] = render_timeseries(panel, series_, i);
    };

    const std::vector<Channel>* ts_channels = nullptr;
    static const std::vector<Channel> kVis5Channels = {Channel::AccW, Channel::PrecW,
                                                       Channel::Amag};
    if (id_ == VisId::Vis3) ts_channels = &cfg_.vis3_channels;
    if (id_ == VisId::Vis5) ts_channels = &kVis5Channels;

    for (const Placement& p : layout_.placements) {
        if (p.slot.rfind("panel:ts", 0) == 0 && ts_channels) {
            size_t k = size_t(std::stoi(p.slot.substr(8)));
            ts_panel(p, (*ts_channels)[k % ts_channels->size()]);
        } else if (p.slot == "panel:polar") {
            PolarPanel panel;
            panel.w = p.dst.w;
            panel.h = p.dst.h;
            panel.max_radius = polar_max_radius_;
            panel.trail_s = cfg_.polar_trail_s;
            panel.style = cfg_.style;
            rendered[p.slot] = render_polar(panel, series_, i);
        } else if (p.slot == "panel:text") {
            TextPanel panel;
            panel.w = p.dst.w;
            panel.h = p.dst.h;
            panel.style = cfg_.style;
            rendered[p.slot] = render_text_panel(panel, sample, shots_so_far);
        } else if (p.slot == "video") {
            Frame video = to_rgb(src);
            if (id_ == VisId::Vis2) {
                const StabilizationOffset& s = stab_[size_t(i)];
                video = translate_frame(video, s.sx, s.sy, layout_.background);
            } else if (id_ == VisId::Vis5) {
                OverlaySpec spec = cfg_.overlays;
                spec.style = cfg_.style;
                draw_overlays(video, spec, sample, track_[size_t(i)], aimpoint_);
            }
            rendered[p.slot] = std::move(video);
        }
    }

    std::map<std::string, const Frame*> inputs;
    for (const auto& [slot, frame] : rendered) inputs[slot] = &frame;
    Frame out = compose_frame(layout_, inputs);
    out.index = src.index;
    out.pts_seconds = src.pts_seconds;
    return out;
}

std::vector<Frame> render_visualization(VisId id, const Clip& clip,
                                        std::span<const TrackPoint> track,
                                        std::span<const AimSample> series,
                                        std::span<const ShotEvent> shots,
                                        const RenderConfig& cfg) {
    VisualizationRenderer renderer(id, clip.header, track, series, shots, cfg);
    std::vector<Frame> out;
    out.reserve(clip.frames.size());
    for (const Frame& f : clip.frames) out.push_back(renderer.render_frame(f));
    return out;
}

}  // namespace aimtrace
