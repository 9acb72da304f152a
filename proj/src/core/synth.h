#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frame.h"
#include "tracker.h"

namespace aimtrace {

// Parametric aiming-motion model used to manufacture scope footage with
// known ground truth: band-limited tremor, sinusoidal breathing sway,
// optional linear drift, and impulsive recoil kicks with exponential
// recovery.

struct MarkerSpec {
    int size_px = 33;  // odd; concentric black/white squares
    int band_px = 4;
};

struct TremorSpec {
    double rms_px = 0.0;       // RMS of the radial tremor displacement
    double bandwidth_hz = 2.0;  // one-pole low-pass corner
    uint64_t seed = 1;          // master seed for tremor and pixel noise
};

struct BreathingSpec {
    double amplitude_px = 0.0;
    double freq_hz = 0.25;
    double axis_deg = 90.0;  // 0 = +x, 90 = +y
};

struct ShotSpec {
    double t = 0.0;
    double recoil_px = 60.0;
    double recover_s = 0.4;
};

struct DriftSpec {
    double x_px_s = 0.0;
    double y_px_s = 0.0;
};

struct ScenarioSpec {
    double duration_s = 10.0;
    double fps = 30.0;
    int width = 320;
    int height = 240;
    MarkerSpec marker;
    TremorSpec tremor;
    BreathingSpec breathing;
    std::vector<ShotSpec> shots;
    DriftSpec drift;
    double noise_sigma = 0.0;
    int background = 96;  // flat background luma

    static ScenarioSpec from_json_file(const std::string& path);
    static ScenarioSpec from_json_text(const std::string& text, const std::string& context);
    std::string to_json_text() const;

    // Throws Error(Data) naming the offending field: positive fps and
    // dimensions, odd marker size that fits the frame with margin
    // >= max recoil + 3 * tremor rms, strictly increasing shot times
    // inside [0, duration).
    void validate() const;

    int64_t frame_count() const;
    int fps_num() const;
    int fps_den() const;
    ClipHeader clip_header() const;
};

struct TruthLog {
    std::vector<double> t;
    std::vector<Vec2> center;  // true marker center, sub-pixel
    std::vector<double> shot_times;
};

// Deterministic trajectory for the scenario: tremor is seeded filtered
// Gaussian noise rescaled to the requested RMS, breathing a sinusoid along
// the given axis, recoil an instant kick decaying as exp(-(t-ts)/recover).
TruthLog generate_trajectory(const ScenarioSpec& spec);

// The exact marker raster; doubles as the tracking template.
Frame render_marker(const MarkerSpec& marker);

// One Gray8 frame: flat background, the marker placed at the rounded true
// center, then seeded additive pixel noise.
Frame render_synth_frame(const ScenarioSpec& spec, const TruthLog& truth, int64_t index);

Clip render_clip(const ScenarioSpec& spec, const TruthLog& truth);

// csv columns: frame_idx,t,true_x,true_y
void save_truth_csv(const std::string& path, const TruthLog& truth);
TruthLog load_truth_csv(const std::string& path);

// json: {"shot_times_s": [..]}
void save_truth_shots_json(const std::string& path, const TruthLog& truth);

}  // namespace aimtrace
