#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frame.h"

namespace aimtrace {

// Reference patch for the target marker. The anchor is the marker center
// expressed in patch coordinates; reported track positions are
// placement + anchor.
struct Template {
    Frame patch;  // Gray8
    double anchor_x = 0.0;
    double anchor_y = 0.0;

    // Validates: gray patch, at least 3x3, nonzero variance. Anchor
    // defaults to the patch center ((w-1)/2, (h-1)/2).
    static Template create(Frame patch, std::optional<Vec2> anchor = {});
};

enum class TrackStatus { Locked, Reacquired, Lost };

const char* track_status_name(TrackStatus status);
TrackStatus track_status_from_name(const std::string& name);

struct TrackPoint {
    int64_t frame_index = 0;
    double t = 0.0;
    double x = 0.0;  // marker center, frame coordinates, sub-pixel
    double y = 0.0;
    double score = 0.0;  // NCC in [-1, 1]
    TrackStatus status = TrackStatus::Lost;
};

struct MatchResult {
    double x = 0.0;  // refined placement (template top-left), sub-pixel
    double y = 0.0;
    int peak_x = 0;  // integer argmax placement
    int peak_y = 0;
    double score = 0.0;
    int map_w = 0;  // score map dimensions (number of evaluated placements)
    int map_h = 0;
};

struct TrackerConfig {
    double lock_threshold = 0.55;
    int search_radius_px = 48;
};

// Normalized cross-correlation over every placement of the template inside
// `search` (whole frame when absent):
//
//   ncc(u,v) = sum((T - mean T) * (W - mean W))
//              / sqrt(sum((T - mean T)^2) * sum((W - mean W)^2))
//
// with W the image window at placement (u,v). Placements over a constant
// window score 0. Ties resolve to the smallest (y, x). The integer peak is
// refined per axis by a three-point parabolic fit clamped to +-0.5 px.
// Throws Error(Geometry) when no full placement fits.
MatchResult match_template(const Frame& gray, const Template& tmpl,
                           std::optional<Rect> search = {});

// Frame-by-frame tracking. Frame 0 searches the whole frame; later frames
// search a window of cfg.search_radius_px around the previous center and
// fall back to a full-frame search when the windowed score drops below
// cfg.lock_threshold. Unrecovered frames carry the previous center with
// status Lost; the first good frame after a loss reports Reacquired.
class SequenceTracker {
public:
    SequenceTracker(Template tmpl, TrackerConfig cfg, const ClipHeader& header);

    TrackPoint push(const Frame& frame);
    const std::vector<TrackPoint>& points() const { return points_; }

private:
    Template tmpl_;
    TrackerConfig cfg_;
    ClipHeader header_;
    std::vector<TrackPoint> points_;
};

std::vector<TrackPoint> track_sequence(std::span<const Frame> frames, const Template& tmpl,
                                       const TrackerConfig& cfg, const ClipHeader& header);

// csv columns: frame_idx,t_sec,x_px,y_px,score,status
void save_track_csv(const std::string& path, std::span<const TrackPoint> track);
std::vector<TrackPoint> load_track_csv(const std::string& path);

}  // namespace aimtrace
