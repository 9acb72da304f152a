#include "aimtrace.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "core/compose.h"
#include "core/error.h"
#include "core/frame.h"
#include "core/image_io.h"
#include "core/kinematics.h"
#include "core/pairstats.h"
#include "core/strfmt.h"
#include "core/synth.h"
#include "core/tracker.h"
#include "core/y4m.h"

using namespace aimtrace;

namespace {

thread_local std::string g_last_error;

at_status map_kind(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io: return AT_E_IO;
        case ErrorKind::Format: return AT_E_FORMAT;
        case ErrorKind::Data: return AT_E_DATA;
        case ErrorKind::Config: return AT_E_CONFIG;
        case ErrorKind::Geometry: return AT_E_GEOMETRY;
        case ErrorKind::Unsupported: return AT_E_UNSUPPORTED;
        case ErrorKind::Internal: return AT_E_INTERNAL;
    }
    return AT_E_INTERNAL;
}

at_status set_error(at_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

// Runs `fn` with every exception folded into a status code.
template <typename Fn>
at_status guarded(Fn&& fn) {
    try {
        fn();
        return AT_OK;
    } catch (const Error& e) {
        return set_error(map_kind(e.kind()), e.what());
    } catch (const std::exception& e) {
        return set_error(AT_E_INTERNAL, e.what());
    } catch (...) {
        return set_error(AT_E_INTERNAL, "unknown failure");
    }
}

at_status require(bool ok, const char* what) {
    return ok ? AT_OK : set_error(AT_E_CONFIG, strfmt("null argument: %s", what));
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ClipHeader header_from_info(const at_clip_info& info) {
    ClipHeader h;
    h.width = info.width;
    h.height = info.height;
    h.fps_num = info.fps_num;
    h.fps_den = info.fps_den;
    h.format = info.pixel_format == AT_PF_GRAY8   ? PixelFormat::Gray8
               : info.pixel_format == AT_PF_RGB24 ? PixelFormat::Rgb24
                                                  : PixelFormat::Yuv420;
    if (info.frame_count >= 0) h.frame_count = info.frame_count;
    return h;
}

}  // namespace

struct at_clip {
    Clip clip;
};
struct at_scenario {
    ScenarioSpec spec;
};
struct at_truth {
    TruthLog truth;
};
struct at_template {
    Template tmpl;
};
struct at_track {
    std::vector<TrackPoint> points;
};
struct at_series {
    std::vector<AimSample> samples;
    std::vector<ShotEvent> shots;
};
struct at_report {
    aimtrace::stats::PairwiseReport report;
};

extern "C" {

const char* at_status_name(at_status status) {
    switch (status) {
        case AT_OK: return "ok";
        case AT_E_IO: return "io";
        case AT_E_FORMAT: return "format";
        case AT_E_DATA: return "data";
        case AT_E_CONFIG: return "config";
        case AT_E_GEOMETRY: return "geometry";
        case AT_E_UNSUPPORTED: return "unsupported";
        case AT_E_INTERNAL: return "internal";
    }
    return "?";
}

const char* at_last_error(void) {
    return g_last_error.c_str();
}

const char* at_version(void) {
    return "0.1.0";
}

void at_string_free(char* s) {
    delete[] s;
}

/* ---------------- clips ---------------- */

at_status at_clip_open(const char* path, at_clip** out) {
    if (at_status s = require(path && out, "path/out")) return s;
    return guarded([&] {
        auto clip = std::make_unique<at_clip>();
        if (std::filesystem::is_directory(path))
            clip->clip = read_image_sequence(path);
        else
            clip->clip = read_y4m_file(path);
        *out = clip.release();
    });
}

at_status at_clip_save(const at_clip* clip, const char* path) {
    if (at_status s = require(clip && path, "clip/path")) return s;
    return guarded([&] {
        const Clip& c = clip->clip;
        if (c.header.format == PixelFormat::Rgb24) {
            ClipHeader header = c.header;
            header.format = PixelFormat::Yuv420;
            std::ofstream out(path, std::ios::binary);
            if (!out) fail(ErrorKind::Io, strfmt("cannot open '%s' for writing", path));
            Y4mWriter writer(out, header);
            for (const Frame& f : c.frames) writer.write(rgb_to_yuv420(f));
        } else {
            write_y4m_file(path, c.header, c.frames);
        }
    });
}

at_status at_clip_get_info(const at_clip* clip, at_clip_info* out) {
    if (at_status s = require(clip && out, "clip/out")) return s;
    const ClipHeader& h = clip->clip.header;
    out->width = h.width;
    out->height = h.height;
    out->fps_num = h.fps_num;
    out->fps_den = h.fps_den;
    out->pixel_format = h.format == PixelFormat::Gray8   ? AT_PF_GRAY8
                        : h.format == PixelFormat::Rgb24 ? AT_PF_RGB24
                                                         : AT_PF_YUV420;
    out->frame_count = (long long)clip->clip.frames.size();
    return AT_OK;
}

at_status at_clip_digest(const at_clip* clip, unsigned long long* out) {
    if (at_status s = require(clip && out, "clip/out")) return s;
    return guarded([&] { *out = clip_digest(clip->clip); });
}

void at_clip_free(at_clip* clip) {
    delete clip;
}

/* ---------------- synth ---------------- */

at_status at_scenario_load(const char* json_path, at_scenario** out) {
    if (at_status s = require(json_path && out, "json_path/out")) return s;
    return guarded([&] {
        auto scenario = std::make_unique<at_scenario>();
        scenario->spec = ScenarioSpec::from_json_file(json_path);
        scenario->spec.validate();
        *out = scenario.release();
    });
}

at_status at_scenario_parse(const char* json_text, at_scenario** out) {
    if (at_status s = require(json_text && out, "json_text/out")) return s;
    return guarded([&] {
        auto scenario = std::make_unique<at_scenario>();
        scenario->spec = ScenarioSpec::from_json_text(json_text, "scenario");
        scenario->spec.validate();
        *out = scenario.release();
    });
}

void at_scenario_free(at_scenario* scenario) {
    delete scenario;
}

at_status at_synth_run(const at_scenario* scenario, at_clip** out_clip, at_truth** out_truth,
                       const char* template_image_path) {
    if (at_status s = require(scenario != nullptr, "scenario")) return s;
    return guarded([&] {
        TruthLog truth = generate_trajectory(scenario->spec);
        if (template_image_path)
            save_image(render_marker(scenario->spec.marker), template_image_path);
        if (out_clip) {
            auto clip = std::make_unique<at_clip>();
            clip->clip = render_clip(scenario->spec, truth);
            *out_clip = clip.release();
        }
        if (out_truth) {
            auto t = std::make_unique<at_truth>();
            t->truth = std::move(truth);
            *out_truth = t.release();
        }
    });
}

at_status at_truth_save_csv(const at_truth* truth, const char* path) {
    if (at_status s = require(truth && path, "truth/path")) return s;
    return guarded([&] { save_truth_csv(path, truth->truth); });
}

at_status at_truth_save_shots_json(const at_truth* truth, const char* path) {
    if (at_status s = require(truth && path, "truth/path")) return s;
    return guarded([&] { save_truth_shots_json(path, truth->truth); });
}

long long at_truth_size(const at_truth* truth) {
    return truth ? (long long)truth->truth.center.size() : 0;
}

void at_truth_free(at_truth* truth) {
    delete truth;
}

/* ---------------- tracking ---------------- */

void at_track_config_init(at_track_config* cfg) {
    if (!cfg) return;
    TrackerConfig defaults;
    cfg->lock_threshold = defaults.lock_threshold;
    cfg->search_radius_px = defaults.search_radius_px;
}

at_status at_template_load(const char* image_path, double anchor_x, double anchor_y,
                           at_template** out) {
    if (at_status s = require(image_path && out, "image_path/out")) return s;
    return guarded([&] {
        Frame patch = to_gray(load_image(image_path));
        std::optional<Vec2> anchor;
        if (!std::isnan(anchor_x) && !std::isnan(anchor_y)) anchor = Vec2{anchor_x, anchor_y};
        auto tmpl = std::make_unique<at_template>();
        tmpl->tmpl = Template::create(std::move(patch), anchor);
        *out = tmpl.release();
    });
}

void at_template_free(at_template* tmpl) {
    delete tmpl;
}

at_status at_track_run(const at_clip* clip, const at_template* tmpl, const at_track_config* cfg,
                       at_track** out) {
    if (at_status s = require(clip && tmpl && out, "clip/template/out")) return s;
    return guarded([&] {
        TrackerConfig config;
        if (cfg) {
            config.lock_threshold = cfg->lock_threshold;
            config.search_radius_px = cfg->search_radius_px;
        }
        auto track = std::make_unique<at_track>();
        track->points =
            track_sequence(clip->clip.frames, tmpl->tmpl, config, clip->clip.header);
        *out = track.release();
    });
}

at_status at_track_save_csv(const at_track* track, const char* path) {
    if (at_status s = require(track && path, "track/path")) return s;
    return guarded([&] { save_track_csv(path, track->points); });
}

at_status at_track_load_csv(const char* path, at_track** out) {
    if (at_status s = require(path && out, "path/out")) return s;
    return guarded([&] {
        auto track = std::make_unique<at_track>();
        track->points = load_track_csv(path);
        *out = track.release();
    });
}

long long at_track_size(const at_track* track) {
    return track ? (long long)track->points.size() : 0;
}

at_status at_track_get(const at_track* track, long long index, at_track_point* out) {
    if (at_status s = require(track && out, "track/out")) return s;
    if (index < 0 || size_t(index) >= track->points.size())
        return set_error(AT_E_DATA, strfmt("track index %lld out of range", index));
    const TrackPoint& p = track->points[size_t(index)];
    out->frame_index = p.frame_index;
    out->t = p.t;
    out->x = p.x;
    out->y = p.y;
    out->score = p.score;
    out->status = p.status == TrackStatus::Locked       ? AT_TRACK_LOCKED
                  : p.status == TrackStatus::Reacquired ? AT_TRACK_REACQUIRED
                                                        : AT_TRACK_LOST;
    return AT_OK;
}

void at_track_free(at_track* track) {
    delete track;
}

/* ---------------- kinematics ---------------- */

void at_metrics_config_init(at_metrics_config* cfg) {
    if (!cfg) return;
    MetricsConfig defaults;
    cfg->window_s = defaults.window_s;
    cfg->smooth_alpha = defaults.smooth_alpha;
    cfg->recoil_threshold = 0.0;
    cfg->refractory_s = defaults.refractory_s;
    cfg->aimpoint_x = NAN;
    cfg->aimpoint_y = NAN;
    cfg->px_per_mrad = 0.0;
}

namespace {

MetricsConfig metrics_config_from(const at_metrics_config* cfg) {
    MetricsConfig config;
    if (!cfg) return config;
    config.window_s = cfg->window_s;
    config.smooth_alpha = cfg->smooth_alpha;
    if (cfg->recoil_threshold > 0) config.recoil_threshold = cfg->recoil_threshold;
    config.refractory_s = cfg->refractory_s;
    if (!std::isnan(cfg->aimpoint_x) && !std::isnan(cfg->aimpoint_y))
        config.aimpoint = Vec2{cfg->aimpoint_x, cfg->aimpoint_y};
    if (cfg->px_per_mrad > 0) config.px_per_mrad = cfg->px_per_mrad;
    return config;
}

}  // namespace

at_status at_metrics_run(const at_track* track, const at_clip_info* info,
                         const at_metrics_config* cfg, at_series** out) {
    if (at_status s = require(track && info && out, "track/info/out")) return s;
    return guarded([&] {
        MetricsConfig config = metrics_config_from(cfg);
        auto series = std::make_unique<at_series>();
        series->samples = derive_series(track->points, header_from_info(*info), config);
        series->shots = detect_shots(series->samples, config);
        *out = series.release();
    });
}

at_status at_series_save_csv(const at_series* series, const char* path) {
    if (at_status s = require(series && path, "series/path")) return s;
    return guarded([&] { save_series_csv(path, series->samples, series->shots); });
}

at_status at_series_load_csv(const char* path, at_series** out) {
    if (at_status s = require(path && out, "path/out")) return s;
    return guarded([&] {
        auto series = std::make_unique<at_series>();
        series->samples = load_series_csv(path, &series->shots);
        *out = series.release();
    });
}

at_status at_series_save_shots_json(const at_series* series, const char* path) {
    if (at_status s = require(series && path, "series/path")) return s;
    return guarded([&] { save_shots_json(path, series->shots); });
}

long long at_series_size(const at_series* series) {
    return series ? (long long)series->samples.size() : 0;
}

at_status at_series_get(const at_series* series, long long index, at_aim_sample* out) {
    if (at_status s = require(series && out, "series/out")) return s;
    if (index < 0 || size_t(index) >= series->samples.size())
        return set_error(AT_E_DATA, strfmt("series index %lld out of range", index));
    const AimSample& a = series->samples[size_t(index)];
    out->frame_index = a.frame_index;
    out->t = a.t;
    out->dx = a.dx;
    out->dy = a.dy;
    out->r = a.r;
    out->vx = a.vx;
    out->vy = a.vy;
    out->speed = a.speed;
    out->ax = a.ax;
    out->ay = a.ay;
    out->amag = a.amag;
    out->acc_w = a.acc_w;
    out->prec_w = a.prec_w;
    out->valid = a.valid ? 1 : 0;
    return AT_OK;
}

long long at_series_shot_count(const at_series* series) {
    return series ? (long long)series->shots.size() : 0;
}

at_status at_series_get_shot(const at_series* series, long long index, at_shot_event* out) {
    if (at_status s = require(series && out, "series/out")) return s;
    if (index < 0 || size_t(index) >= series->shots.size())
        return set_error(AT_E_DATA, strfmt("shot index %lld out of range", index));
    const ShotEvent& e = series->shots[size_t(index)];
    out->frame_index = e.frame_index;
    out->t = e.t;
    out->peak_amag = e.peak_amag;
    return AT_OK;
}

void at_series_free(at_series* series) {
    delete series;
}

/* ---------------- visualization ---------------- */

void at_render_config_init(at_render_config* cfg, int vis) {
    if (!cfg) return;
    cfg->vis = vis;
    cfg->layout_json_path = nullptr;
    cfg->style_json_path = nullptr;
    cfg->timeseries_span_s = 5.0;
    cfg->polar_max_radius = 0.0;
    cfg->aimpoint_x = NAN;
    cfg->aimpoint_y = NAN;
}

at_status at_render_run(const at_clip* clip, const at_track* track, const at_series* series,
                        const at_render_config* cfg, at_clip** out) {
    if (at_status s = require(clip && track && series && cfg && out, "clip/track/series/cfg/out"))
        return s;
    return guarded([&] {
        RenderConfig config;
        if (cfg->style_json_path) config.style = Style::from_json_file(cfg->style_json_path);
        if (cfg->layout_json_path)
            config.layout = LayoutPreset::from_json_file(cfg->layout_json_path);
        config.timeseries_span_s = cfg->timeseries_span_s;
        config.polar_max_radius = cfg->polar_max_radius;
        if (!std::isnan(cfg->aimpoint_x) && !std::isnan(cfg->aimpoint_y))
            config.aimpoint = Vec2{cfg->aimpoint_x, cfg->aimpoint_y};

        auto result = std::make_unique<at_clip>();
        VisualizationRenderer renderer(vis_from_int(cfg->vis), clip->clip.header, track->points,
                                       series->samples, series->shots, config);
        result->clip.header = renderer.output_header();
        result->clip.frames.reserve(clip->clip.frames.size());
        for (const Frame& f : clip->clip.frames)
            result->clip.frames.push_back(renderer.render_frame(f));
        result->clip.header.frame_count = (long long)result->clip.frames.size();
        *out = result.release();
    });
}

at_status at_render_dump_layout(int vis, int width, int height, char** json_out) {
    if (at_status s = require(json_out != nullptr, "json_out")) return s;
    return guarded([&] {
        LayoutPreset preset = default_layout(vis_from_int(vis), width, height);
        *json_out = dup_string(preset.to_json_text());
    });
}

/* ---------------- statistics ---------------- */

void at_stats_config_init(at_stats_config* cfg) {
    if (!cfg) return;
    cfg->alpha = 0.05;
    cfg->df_override = 0;
}

at_status at_stats_analyze_file(const char* preferences_csv, const at_stats_config* cfg,
                                at_report** out) {
    if (at_status s = require(preferences_csv && out, "preferences_csv/out")) return s;
    return guarded([&] {
        double alpha = cfg ? cfg->alpha : 0.05;
        std::optional<int> df;
        if (cfg && cfg->df_override > 0) df = cfg->df_override;
        auto report = std::make_unique<at_report>();
        report->report = aimtrace::stats::analyze_preferences(
            aimtrace::stats::load_preferences_csv(preferences_csv), alpha, df);
        *out = report.release();
    });
}

at_status at_report_summary(const at_report* report, at_stats_summary* out) {
    if (at_status s = require(report && out, "report/out")) return s;
    const auto& r = report->report;
    out->stimuli = int(r.labels.size());
    out->judges = int(r.judge_ids.size());
    out->zeta_group = r.zeta_group;
    out->d_statistic = r.equality.d_statistic;
    out->df = r.equality.df;
    out->critical = r.equality.critical;
    out->significant = r.equality.significant ? 1 : 0;
    out->threshold_r = r.threshold_r;
    out->group_count = int(r.grouping.groups.size());
    return AT_OK;
}

at_status at_report_json(const at_report* report, char** out) {
    if (at_status s = require(report && out, "report/out")) return s;
    return guarded([&] { *out = dup_string(aimtrace::stats::report_to_json(report->report)); });
}

at_status at_report_text(const at_report* report, const char* row_label, char** out) {
    if (at_status s = require(report && out, "report/out")) return s;
    return guarded([&] {
        *out = dup_string(
            aimtrace::stats::report_to_text(report->report, row_label ? row_label : "all"));
    });
}

void at_report_free(at_report* report) {
    delete report;
}

at_status at_stats_analyze_ratings_file(const char* ratings_csv, char** json_out) {
    if (at_status s = require(ratings_csv && json_out, "ratings_csv/json_out")) return s;
    return guarded([&] {
        *json_out = dup_string(
            aimtrace::stats::analyze_ratings_json(aimtrace::stats::load_ratings_csv(ratings_csv)));
    });
}

at_status at_mann_whitney_u(const double* a, size_t na, const double* b, size_t nb, double* u,
                            double* p) {
    if (at_status s = require(a && b && u && p, "a/b/u/p")) return s;
    return guarded([&] {
        auto res = aimtrace::stats::mann_whitney_u({a, na}, {b, nb});
        *u = res.u;
        *p = res.p;
    });
}

at_status at_wilcoxon_signed_rank(const double* x, const double* y, size_t n, double* w,
                                  double* p) {
    if (at_status s = require(x && y && w && p, "x/y/w/p")) return s;
    return guarded([&] {
        auto res = aimtrace::stats::wilcoxon_signed_rank({x, n}, {y, n});
        *w = res.w;
        *p = res.p;
    });
}

} /* extern "C" */
