/*
 * aimtrace C API
 *
 * Scope-video aiming analytics: synthetic footage generation, template
 * tracking, aim kinematics, composite visualization rendering, and
 * paired-comparison statistics.
 *
 * Conventions:
 *   - every function returns an at_status; AT_OK is 0
 *   - on failure, at_last_error() returns a thread-local message
 *   - objects are opaque handles released with their at_*_free function
 *   - strings returned through char** are released with at_string_free
 */

#ifndef AIMTRACE_H
#define AIMTRACE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum at_status {
    AT_OK = 0,
    AT_E_IO = 1,          /* file open/read/write failure */
    AT_E_FORMAT = 2,      /* malformed file contents */
    AT_E_DATA = 3,        /* semantically invalid data */
    AT_E_CONFIG = 4,      /* bad configuration value */
    AT_E_GEOMETRY = 5,    /* impossible geometric request */
    AT_E_UNSUPPORTED = 6, /* recognized but unhandled input */
    AT_E_INTERNAL = 7
} at_status;

const char* at_status_name(at_status status);
const char* at_last_error(void); /* thread-local; valid until the next call */
const char* at_version(void);
void at_string_free(char* s);

/* ------------------------------------------------------------------ */
/* clips                                                               */
/* ------------------------------------------------------------------ */

typedef struct at_clip at_clip;

typedef enum at_pixel_format {
    AT_PF_GRAY8 = 0,
    AT_PF_RGB24 = 1,
    AT_PF_YUV420 = 2
} at_pixel_format;

typedef struct at_clip_info {
    int width;
    int height;
    int fps_num;
    int fps_den;
    at_pixel_format pixel_format;
    long long frame_count;
} at_clip_info;

/* .y4m file, or a directory of numbered images with a frames.json sidecar */
at_status at_clip_open(const char* path, at_clip** out);
/* .y4m target; rgb24 clips are converted to yuv420 on write */
at_status at_clip_save(const at_clip* clip, const char* path);
at_status at_clip_get_info(const at_clip* clip, at_clip_info* out);
/* content digest over decoded frames (fnv-1a), for determinism checks */
at_status at_clip_digest(const at_clip* clip, unsigned long long* out);
void at_clip_free(at_clip* clip);

/* ------------------------------------------------------------------ */
/* synthetic footage                                                   */
/* ------------------------------------------------------------------ */

typedef struct at_scenario at_scenario;
typedef struct at_truth at_truth;

at_status at_scenario_load(const char* json_path, at_scenario** out);
at_status at_scenario_parse(const char* json_text, at_scenario** out);
void at_scenario_free(at_scenario* scenario);

/* generates the trajectory and renders the clip; any output pointer may be
 * NULL when unwanted. template_image_path, when given, receives the exact
 * marker raster used (png/pgm by extension). */
at_status at_synth_run(const at_scenario* scenario, at_clip** out_clip, at_truth** out_truth,
                       const char* template_image_path);
at_status at_truth_save_csv(const at_truth* truth, const char* path);
at_status at_truth_save_shots_json(const at_truth* truth, const char* path);
long long at_truth_size(const at_truth* truth);
void at_truth_free(at_truth* truth);

/* ------------------------------------------------------------------ */
/* tracking                                                            */
/* ------------------------------------------------------------------ */

typedef struct at_template at_template;
typedef struct at_track at_track;

typedef struct at_track_config {
    double lock_threshold;  /* default 0.55 */
    int search_radius_px;   /* default 48 */
} at_track_config;

void at_track_config_init(at_track_config* cfg);

/* anchor in patch coordinates; pass NAN for the patch center */
at_status at_template_load(const char* image_path, double anchor_x, double anchor_y,
                           at_template** out);
void at_template_free(at_template* tmpl);

typedef enum at_track_status_flag {
    AT_TRACK_LOCKED = 0,
    AT_TRACK_REACQUIRED = 1,
    AT_TRACK_LOST = 2
} at_track_status_flag;

typedef struct at_track_point {
    long long frame_index;
    double t;
    double x;
    double y;
    double score;
    at_track_status_flag status;
} at_track_point;

at_status at_track_run(const at_clip* clip, const at_template* tmpl,
                       const at_track_config* cfg, at_track** out);
at_status at_track_save_csv(const at_track* track, const char* path);
at_status at_track_load_csv(const char* path, at_track** out);
long long at_track_size(const at_track* track);
at_status at_track_get(const at_track* track, long long index, at_track_point* out);
void at_track_free(at_track* track);

/* ------------------------------------------------------------------ */
/* kinematics                                                          */
/* ------------------------------------------------------------------ */

typedef struct at_series at_series;

typedef struct at_metrics_config {
    double window_s;         /* default 1.0 */
    double smooth_alpha;     /* default 1.0 (off) */
    double recoil_threshold; /* <= 0: robust auto threshold */
    double refractory_s;     /* default 0.5 */
    double aimpoint_x;       /* NAN: frame center */
    double aimpoint_y;
    double px_per_mrad;      /* <= 0: report pixels */
} at_metrics_config;

void at_metrics_config_init(at_metrics_config* cfg);

typedef struct at_aim_sample {
    long long frame_index;
    double t;
    double dx, dy, r;
    double vx, vy, speed;
    double ax, ay, amag;
    double acc_w, prec_w;
    int valid;
} at_aim_sample;

typedef struct at_shot_event {
    long long frame_index;
    double t;
    double peak_amag;
} at_shot_event;

/* derives the attribute series and runs shot detection */
at_status at_metrics_run(const at_track* track, const at_clip_info* info,
                         const at_metrics_config* cfg, at_series** out);
at_status at_series_save_csv(const at_series* series, const char* path);
at_status at_series_load_csv(const char* path, at_series** out);
at_status at_series_save_shots_json(const at_series* series, const char* path);
long long at_series_size(const at_series* series);
at_status at_series_get(const at_series* series, long long index, at_aim_sample* out);
long long at_series_shot_count(const at_series* series);
at_status at_series_get_shot(const at_series* series, long long index, at_shot_event* out);
void at_series_free(at_series* series);

/* ------------------------------------------------------------------ */
/* visualization                                                       */
/* ------------------------------------------------------------------ */

typedef struct at_render_config {
    int vis;                      /* preset 1..5 */
    const char* layout_json_path; /* NULL: built-in geometry */
    const char* style_json_path;  /* NULL: default palette */
    double timeseries_span_s;     /* default 5.0 */
    double polar_max_radius;      /* <= 0: auto from the series */
    double aimpoint_x;            /* NAN: frame center */
    double aimpoint_y;
} at_render_config;

void at_render_config_init(at_render_config* cfg, int vis);

at_status at_render_run(const at_clip* clip, const at_track* track, const at_series* series,
                        const at_render_config* cfg, at_clip** out);
/* default layout geometry for a preset at a given source size, as json */
at_status at_render_dump_layout(int vis, int width, int height, char** json_out);

/* ------------------------------------------------------------------ */
/* paired-comparison statistics                                        */
/* ------------------------------------------------------------------ */

typedef struct at_report at_report;

typedef struct at_stats_config {
    double alpha;    /* default 0.05 */
    int df_override; /* <= 0: stimuli - 1 */
} at_stats_config;

void at_stats_config_init(at_stats_config* cfg);

typedef struct at_stats_summary {
    int stimuli;
    int judges;
    double zeta_group;
    double d_statistic;
    int df;
    double critical;
    int significant;
    int threshold_r;
    int group_count;
} at_stats_summary;

at_status at_stats_analyze_file(const char* preferences_csv, const at_stats_config* cfg,
                                at_report** out);
at_status at_report_summary(const at_report* report, at_stats_summary* out);
at_status at_report_json(const at_report* report, char** out);
at_status at_report_text(const at_report* report, const char* row_label, char** out);
void at_report_free(at_report* report);

/* ratings csv (judge_id,group,stimulus,rating) -> json analysis */
at_status at_stats_analyze_ratings_file(const char* ratings_csv, char** json_out);

/* rating tests on raw arrays */
at_status at_mann_whitney_u(const double* a, size_t na, const double* b, size_t nb, double* u,
                            double* p);
at_status at_wilcoxon_signed_rank(const double* x, const double* y, size_t n, double* w,
                                  double* p);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* AIMTRACE_H */
