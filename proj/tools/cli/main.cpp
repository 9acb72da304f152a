// aimtrace command line: stage-separated pipeline over file contracts.
//
//   synth    scenario.json -> clip.y4m + truth.csv + shots.json + template
//   track    clip.y4m + template image -> track.csv
//   metrics  track.csv (+ clip header) -> metrics.csv + shots.json
//   render   clip + track + metrics -> composite clip (presets 1..5)
//   stats    preference/rating csv -> pairwise report (json + text)
//
// Exit codes: 0 success, 2 input or contract error, 1 internal error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aimtrace.h"

namespace {

int exit_code_for(at_status status) {
    switch (status) {
        case AT_OK: return 0;
        case AT_E_INTERNAL: return 1;
        default: return 2;
    }
}

// Fails the command on a non-ok status, printing the library's message.
struct Bail {
    int code;
};

void check(at_status status) {
    if (status == AT_OK) return;
    std::fprintf(stderr, "aimtrace: error (%s): %s\n", at_status_name(status), at_last_error());
    throw Bail{exit_code_for(status)};
}

template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, std::integral_constant<decltype(Free), Free>>;

using ClipPtr = Handle<at_clip, at_clip_free>;
using ScenarioPtr = Handle<at_scenario, at_scenario_free>;
using TruthPtr = Handle<at_truth, at_truth_free>;
using TemplatePtr = Handle<at_template, at_template_free>;
using TrackPtr = Handle<at_track, at_track_free>;
using SeriesPtr = Handle<at_series, at_series_free>;
using ReportPtr = Handle<at_report, at_report_free>;

struct CliString {
    char* s = nullptr;
    ~CliString() { at_string_free(s); }
};

// Optional pipeline.json: {"tracker": {...}, "metrics": {...}, "render": {...}}.
// Values set by explicit flags win over the file.
struct PipelineConfig {
    nlohmann::json doc;

    static PipelineConfig load(const std::string& path) {
        PipelineConfig cfg;
        if (path.empty()) return cfg;
        std::ifstream in(path);
        if (!in) {
            std::fprintf(stderr, "aimtrace: cannot open config '%s'\n", path.c_str());
            throw Bail{2};
        }
        try {
            in >> cfg.doc;
        } catch (const nlohmann::json::exception& e) {
            std::fprintf(stderr, "aimtrace: bad json in '%s': %s\n", path.c_str(), e.what());
            throw Bail{2};
        }
        return cfg;
    }

    double number(const char* section, const char* key, double fallback) const {
        if (!doc.contains(section)) return fallback;
        return doc[section].value(key, fallback);
    }
    std::string text(const char* section, const char* key, const std::string& fallback) const {
        if (!doc.contains(section)) return fallback;
        return doc[section].value(key, fallback);
    }
};

ClipPtr open_clip(const std::string& path) {
    at_clip* clip = nullptr;
    check(at_clip_open(path.c_str(), &clip));
    return ClipPtr(clip);
}

int cmd_synth(const std::string& scenario_path, const std::string& out_path,
              const std::string& truth_path, const std::string& shots_path,
              const std::string& template_path) {
    at_scenario* scenario = nullptr;
    check(at_scenario_load(scenario_path.c_str(), &scenario));
    ScenarioPtr scenario_guard(scenario);

    at_clip* clip = nullptr;
    at_truth* truth = nullptr;
    check(at_synth_run(scenario, &clip, &truth,
                       template_path.empty() ? nullptr : template_path.c_str()));
    ClipPtr clip_guard(clip);
    TruthPtr truth_guard(truth);

    check(at_clip_save(clip, out_path.c_str()));
    if (!truth_path.empty()) check(at_truth_save_csv(truth, truth_path.c_str()));
    if (!shots_path.empty()) check(at_truth_save_shots_json(truth, shots_path.c_str()));

    at_clip_info info;
    check(at_clip_get_info(clip, &info));
    std::printf("synth: %lld frames %dx%d @ %d/%d fps -> %s\n", info.frame_count, info.width,
                info.height, info.fps_num, info.fps_den, out_path.c_str());
    return 0;
}

int cmd_track(const std::string& in_path, const std::string& template_path, double anchor_x,
              double anchor_y, const std::string& out_path, const at_track_config& cfg) {
    ClipPtr clip = open_clip(in_path);
    at_template* tmpl = nullptr;
    check(at_template_load(template_path.c_str(), anchor_x, anchor_y, &tmpl));
    TemplatePtr tmpl_guard(tmpl);

    at_track* track = nullptr;
    check(at_track_run(clip.get(), tmpl, &cfg, &track));
    TrackPtr track_guard(track);
    check(at_track_save_csv(track, out_path.c_str()));

    long long n = at_track_size(track);
    long long locked = 0;
    for (long long i = 0; i < n; ++i) {
        at_track_point p;
        check(at_track_get(track, i, &p));
        if (p.status == AT_TRACK_LOCKED) ++locked;
    }
    std::printf("track: %lld frames, %lld locked -> %s\n", n, locked, out_path.c_str());
    return 0;
}

int cmd_metrics(const std::string& track_path, const std::string& clip_path, int width,
                int height, double fps, const at_metrics_config& cfg, const std::string& out_path,
                const std::string& shots_path) {
    at_track* track = nullptr;
    check(at_track_load_csv(track_path.c_str(), &track));
    TrackPtr track_guard(track);

    at_clip_info info{};
    if (!clip_path.empty()) {
        ClipPtr clip = open_clip(clip_path);
        check(at_clip_get_info(clip.get(), &info));
    } else {
        if (width <= 0 || height <= 0 || fps <= 0) {
            std::fprintf(stderr,
                         "aimtrace: metrics needs --clip, or --width/--height/--fps together\n");
            return 2;
        }
        info.width = width;
        info.height = height;
        info.fps_num = int(std::lround(fps * 1000.0));
        info.fps_den = 1000;
        info.pixel_format = AT_PF_GRAY8;
        info.frame_count = -1;
    }

    at_series* series = nullptr;
    check(at_metrics_run(track, &info, &cfg, &series));
    SeriesPtr series_guard(series);
    check(at_series_save_csv(series, out_path.c_str()));
    if (!shots_path.empty()) check(at_series_save_shots_json(series, shots_path.c_str()));

    std::printf("metrics: %lld samples, %lld shots -> %s\n", at_series_size(series),
                at_series_shot_count(series), out_path.c_str());
    return 0;
}

int cmd_render(const std::string& in_path, const std::string& track_path,
               const std::string& metrics_path, const std::string& out_path,
               at_render_config cfg) {
    ClipPtr clip = open_clip(in_path);
    at_track* track = nullptr;
    check(at_track_load_csv(track_path.c_str(), &track));
    TrackPtr track_guard(track);
    at_series* series = nullptr;
    check(at_series_load_csv(metrics_path.c_str(), &series));
    SeriesPtr series_guard(series);

    at_clip* out = nullptr;
    check(at_render_run(clip.get(), track, series, &cfg, &out));
    ClipPtr out_guard(out);
    check(at_clip_save(out, out_path.c_str()));

    at_clip_info info;
    check(at_clip_get_info(out, &info));
    std::printf("render: vis %d, %lld frames %dx%d -> %s\n", cfg.vis, info.frame_count,
                info.width, info.height, out_path.c_str());
    return 0;
}

int cmd_stats(const std::string& pref_path, const std::string& ratings_path, double alpha,
              int df_override, const std::string& label, const std::string& json_path) {
    nlohmann::json out_doc;
    if (!pref_path.empty()) {
        at_stats_config cfg;
        at_stats_config_init(&cfg);
        cfg.alpha = alpha;
        cfg.df_override = df_override;
        at_report* report = nullptr;
        check(at_stats_analyze_file(pref_path.c_str(), &cfg, &report));
        ReportPtr report_guard(report);

        CliString text;
        check(at_report_text(report, label.c_str(), &text.s));
        std::fputs(text.s, stdout);

        CliString json_text;
        check(at_report_json(report, &json_text.s));
        out_doc["pairwise"] = nlohmann::json::parse(json_text.s);
    }
    if (!ratings_path.empty()) {
        CliString ratings_json;
        check(at_stats_analyze_ratings_file(ratings_path.c_str(), &ratings_json.s));
        out_doc["ratings"] = nlohmann::json::parse(ratings_json.s);
    }
    if (out_doc.is_null()) {
        std::fprintf(stderr, "aimtrace: stats needs --preferences and/or --ratings\n");
        return 2;
    }
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        out << out_doc.dump(2) << "\n";
        if (!out) {
            std::fprintf(stderr, "aimtrace: failed writing '%s'\n", json_path.c_str());
            return 2;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scope-video aiming analytics"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "pipeline config json (flag overrides win)");

    // synth
    auto* synth = app.add_subcommand("synth", "generate synthetic footage with ground truth");
    std::string scenario_path, synth_out, truth_path, truth_shots, template_out;
    synth->add_option("scenario", scenario_path, "scenario json")->required();
    synth->add_option("--out", synth_out, "output clip (.y4m)")->required();
    synth->add_option("--truth", truth_path, "ground-truth csv");
    synth->add_option("--shots", truth_shots, "ground-truth shot times json");
    synth->add_option("--template", template_out, "marker template image (.png/.pgm)");

    // track
    auto* track = app.add_subcommand("track", "template-match the marker in every frame");
    std::string track_in, track_template, track_out;
    double anchor_x = NAN, anchor_y = NAN;
    double lock_threshold = -1.0;
    int search_radius = -1;
    track->add_option("--in", track_in, "input clip (.y4m or image dir)")->required();
    track->add_option("--template", track_template, "marker template image")->required();
    track->add_option("--anchor-x", anchor_x, "marker center x within the template");
    track->add_option("--anchor-y", anchor_y, "marker center y within the template");
    track->add_option("--lock-threshold", lock_threshold, "ncc score to keep lock");
    track->add_option("--search-radius", search_radius, "windowed search radius, px");
    track->add_option("--out", track_out, "track csv")->required();

    // metrics
    auto* metrics = app.add_subcommand("metrics", "derive aim attributes and detect shots");
    std::string metrics_track, metrics_clip, metrics_out, metrics_shots;
    int m_width = 0, m_height = 0;
    double m_fps = 0.0;
    double window_s = -1, smooth_alpha = -1, recoil_threshold = -1, refractory_s = -1,
           px_per_mrad = -1, aim_x = NAN, aim_y = NAN;
    metrics->add_option("--track", metrics_track, "track csv")->required();
    metrics->add_option("--clip", metrics_clip, "clip the track came from (for header)");
    metrics->add_option("--width", m_width, "frame width when --clip is not given");
    metrics->add_option("--height", m_height, "frame height when --clip is not given");
    metrics->add_option("--fps", m_fps, "frame rate when --clip is not given");
    metrics->add_option("--window", window_s, "trailing window seconds");
    metrics->add_option("--smooth-alpha", smooth_alpha, "position smoothing factor (1 = off)");
    metrics->add_option("--recoil-threshold", recoil_threshold, "manual amag threshold");
    metrics->add_option("--refractory", refractory_s, "seconds between shots");
    metrics->add_option("--px-per-mrad", px_per_mrad, "convert px outputs to mrad");
    metrics->add_option("--aimpoint-x", aim_x, "crosshair x (default frame center)");
    metrics->add_option("--aimpoint-y", aim_y, "crosshair y (default frame center)");
    metrics->add_option("--out", metrics_out, "metrics csv")->required();
    metrics->add_option("--shots", metrics_shots, "shot events json");

    // render
    auto* render = app.add_subcommand("render", "compose a visualization preset");
    std::string render_in, render_track, render_metrics, render_out, layout_path, style_path;
    int vis = 5;
    double span_s = -1, polar_max = -1, r_aim_x = NAN, r_aim_y = NAN;
    bool dump_layout = false;
    int dump_w = 320, dump_h = 240;
    render->add_option("--in", render_in, "source clip");
    render->add_option("--track", render_track, "track csv");
    render->add_option("--metrics", render_metrics, "metrics csv");
    render->add_option("--vis", vis, "preset 1..5")->required();
    render->add_option("--out", render_out, "output clip (.y4m)");
    render->add_option("--layout", layout_path, "layout preset json");
    render->add_option("--style", style_path, "style json");
    render->add_option("--span", span_s, "time-series span seconds");
    render->add_option("--polar-max", polar_max, "polar full-scale radius");
    render->add_option("--aimpoint-x", r_aim_x, "crosshair x (default frame center)");
    render->add_option("--aimpoint-y", r_aim_y, "crosshair y (default frame center)");
    render->add_flag("--dump-layout", dump_layout, "print the default layout json and exit");
    render->add_option("--dump-width", dump_w, "source width for --dump-layout");
    render->add_option("--dump-height", dump_h, "source height for --dump-layout");

    // stats
    auto* stats = app.add_subcommand("stats", "paired-comparison and rating analysis");
    std::string pref_path, ratings_path, stats_json, stats_label = "all";
    double alpha = 0.05;
    int df_override = 0;
    stats->add_option("--preferences", pref_path, "pairwise preference csv");
    stats->add_option("--ratings", ratings_path, "ratings csv");
    stats->add_option("--alpha", alpha, "significance level");
    stats->add_option("--df", df_override, "chi-squared df override");
    stats->add_option("--label", stats_label, "row label for the text table");
    stats->add_option("--out", stats_json, "report json path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad usage is an input error
    }

    try {
        PipelineConfig cfg = PipelineConfig::load(config_path);

        if (synth->parsed())
            return cmd_synth(scenario_path, synth_out, truth_path, truth_shots, template_out);

        if (track->parsed()) {
            at_track_config tc;
            at_track_config_init(&tc);
            tc.lock_threshold = cfg.number("tracker", "lock_threshold", tc.lock_threshold);
            tc.search_radius_px =
                int(cfg.number("tracker", "search_radius_px", tc.search_radius_px));
            if (lock_threshold >= 0) tc.lock_threshold = lock_threshold;
            if (search_radius > 0) tc.search_radius_px = search_radius;
            return cmd_track(track_in, track_template, anchor_x, anchor_y, track_out, tc);
        }

        if (metrics->parsed()) {
            at_metrics_config mc;
            at_metrics_config_init(&mc);
            mc.window_s = cfg.number("metrics", "window_s", mc.window_s);
            mc.smooth_alpha = cfg.number("metrics", "smooth_alpha", mc.smooth_alpha);
            mc.recoil_threshold = cfg.number("metrics", "recoil_threshold", mc.recoil_threshold);
            mc.refractory_s = cfg.number("metrics", "refractory_s", mc.refractory_s);
            mc.px_per_mrad = cfg.number("metrics", "px_per_mrad", mc.px_per_mrad);
            if (window_s > 0) mc.window_s = window_s;
            if (smooth_alpha > 0) mc.smooth_alpha = smooth_alpha;
            if (recoil_threshold > 0) mc.recoil_threshold = recoil_threshold;
            if (refractory_s >= 0) mc.refractory_s = refractory_s;
            if (px_per_mrad > 0) mc.px_per_mrad = px_per_mrad;
            if (!std::isnan(aim_x)) mc.aimpoint_x = aim_x;
            if (!std::isnan(aim_y)) mc.aimpoint_y = aim_y;
            return cmd_metrics(metrics_track, metrics_clip, m_width, m_height, m_fps, mc,
                               metrics_out, metrics_shots);
        }

        if (render->parsed()) {
            if (dump_layout) {
                CliString json;
                check(at_render_dump_layout(vis, dump_w, dump_h, &json.s));
                std::printf("%s\n", json.s);
                return 0;
            }
            if (render_in.empty() || render_track.empty() || render_metrics.empty() ||
                render_out.empty()) {
                std::fprintf(stderr,
                             "aimtrace: render needs --in, --track, --metrics and --out\n");
                return 2;
            }
            at_render_config rc;
            at_render_config_init(&rc, vis);
            std::string cfg_layout = cfg.text("render", "layout", "");
            std::string cfg_style = cfg.text("render", "style", "");
            if (!layout_path.empty()) cfg_layout = layout_path;
            if (!style_path.empty()) cfg_style = style_path;
            rc.layout_json_path = cfg_layout.empty() ? nullptr : cfg_layout.c_str();
            rc.style_json_path = cfg_style.empty() ? nullptr : cfg_style.c_str();
            rc.timeseries_span_s = cfg.number("render", "timeseries_span_s", rc.timeseries_span_s);
            rc.polar_max_radius = cfg.number("render", "polar_max_radius", rc.polar_max_radius);
            if (span_s > 0) rc.timeseries_span_s = span_s;
            if (polar_max > 0) rc.polar_max_radius = polar_max;
            if (!std::isnan(r_aim_x)) rc.aimpoint_x = r_aim_x;
            if (!std::isnan(r_aim_y)) rc.aimpoint_y = r_aim_y;
            return cmd_render(render_in, render_track, render_metrics, render_out, rc);
        }

        if (stats->parsed())
            return cmd_stats(pref_path, ratings_path, alpha, df_override, stats_label,
                             stats_json);
    } catch (const Bail& b) {
        return b.code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "aimtrace: internal error: %s\n", e.what());
        return 1;
    }
    return 2;
}
