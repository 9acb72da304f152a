#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frame.h"
#include "tracker.h"

namespace aimtrace {

struct MetricsConfig {
    std::optional<Vec2> aimpoint;  // crosshair reference; default frame center
    double window_s = 1.0;         // trailing window for acc_w / prec_w
    double smooth_alpha = 1.0;     // position smoothing before differencing; 1 = off
    std::optional<double> recoil_threshold;  // unset = robust auto threshold
    double refractory_s = 0.5;
    double px_per_mrad = 0.0;  // > 0 converts spatial outputs from px to mrad

    void validate() const;
};

// Per-frame aiming attributes. Offsets point from the aimpoint reference to
// the tracked target center; r is the distance to target. acc_w is the
// trailing-window mean distance (closeness to target), prec_w the
// trailing-window RMS spread about the window centroid (grouping).
struct AimSample {
    int64_t frame_index = 0;
    double t = 0.0;
    double dx = 0.0, dy = 0.0;
    double r = 0.0;
    double vx = 0.0, vy = 0.0;
    double speed = 0.0;
    double ax = 0.0, ay = 0.0;
    double amag = 0.0;
    double acc_w = 0.0;
    double prec_w = 0.0;
    bool valid = true;
};

struct ShotEvent {
    int64_t frame_index = 0;
    double t = 0.0;
    double peak_amag = 0.0;
};

struct StabilizationOffset {
    int64_t frame_index = 0;
    int sx = 0;
    int sy = 0;
};

// Backward (causal) differences: v(i) = (p(i) - p(i-1)) * fps with v(0) = 0,
// a likewise with a(0) = a(1) = 0. Windowed statistics run over samples with
// t in (t_i - window_s, t_i].
std::vector<AimSample> derive_series(std::span<const TrackPoint> track, const ClipHeader& header,
                                     const MetricsConfig& cfg);

// Recoil spikes in amag. The threshold is cfg.recoil_threshold when given,
// otherwise 8 * 1.4826 * MAD(amag) with a 1e-6 floor. An excursion above
// the threshold yields one event at its amag maximum; later excursions are
// ignored for cfg.refractory_s after each event.
std::vector<ShotEvent> detect_shots(std::span<const AimSample> series, const MetricsConfig& cfg);

// Integer translation that would bring the tracked center onto the frame
// center. Lost frames reuse the previous shift.
std::vector<StabilizationOffset> stabilization_offsets(std::span<const TrackPoint> track,
                                                       const ClipHeader& header);

// csv columns:
//   frame_idx,t_sec,dx,dy,r,vx,vy,speed,ax,ay,amag,acc_w,prec_w,valid,shot_flag
// Loading rebuilds shot events from the shot_flag rows when `shots` is given.
void save_series_csv(const std::string& path, std::span<const AimSample> series,
                     std::span<const ShotEvent> shots);
std::vector<AimSample> load_series_csv(const std::string& path,
                                       std::vector<ShotEvent>* shots = nullptr);

// json: {"shots": [{"frame_index": .., "t": .., "peak_amag": ..}, ...]}
void save_shots_json(const std::string& path, std::span<const ShotEvent> shots);
std::vector<ShotEvent> load_shots_json(const std::string& path);

}  // namespace aimtrace
