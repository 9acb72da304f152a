#include "tracker.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "csv.h"
#include "error.h"
#include "strfmt.h"

namespace aimtrace {

const char* track_status_name(TrackStatus status) {
    switch (status) {
        case TrackStatus::Locked: return "LOCKED";
        case TrackStatus::Reacquired: return "REACQUIRED";
        case TrackStatus::Lost: return "LOST";
    }
    return "?";
}

TrackStatus track_status_from_name(const std::string& name) {
    if (name == "LOCKED") return TrackStatus::Locked;
    if (name == "REACQUIRED") return TrackStatus::Reacquired;
    if (name == "LOST") return TrackStatus::Lost;
    fail(ErrorKind::Format, strfmt("unknown track status '%s'", name.c_str()));
}

Template Template::create(Frame patch, std::optional<Vec2> anchor) {
    if (patch.format != PixelFormat::Gray8)
        fail(ErrorKind::Config, "template patch must be gray8");
    if (patch.width < 3 || patch.height < 3)
        fail(ErrorKind::Config,
             strfmt("template must be at least 3x3, got %dx%d", patch.width, patch.height));
    double sum = 0.0, sum2 = 0.0;
    for (uint8_t v : patch.plane[0]) {
        sum += v;
        sum2 += double(v) * v;
    }
    double n = double(patch.plane[0].size());
    if (sum2 - sum * sum / n <= 0.0)
        fail(ErrorKind::Config, "template patch has zero variance");
    Template t;
    t.anchor_x = anchor ? anchor->x : (patch.width - 1) / 2.0;
    t.anchor_y = anchor ? anchor->y : (patch.height - 1) / 2.0;
    t.patch = std::move(patch);
    return t;
}

namespace {

// One parabolic refinement step from three samples around a peak.
double parabolic_offset(double sm, double s0, double sp) {
    double denom = 2.0 * (sm + sp - 2.0 * s0);
    if (denom >= 0.0) return 0.0;  // not concave; keep the integer peak
    double d = (sm - sp) / denom;
    return std::clamp(d, -0.5, 0.5);
}

struct SearchArea {
    int x0, y0;  // first placement
    int w, h;    // number of placements per axis
};

}  // namespace

MatchResult match_template(const Frame& gray, const Template& tmpl, std::optional<Rect> search) {
    if (gray.format != PixelFormat::Gray8)
        fail(ErrorKind::Config, "match_template expects a gray8 frame");
    const Frame& patch = tmpl.patch;
    int tw = patch.width, th = patch.height;
    if (tw >= gray.width || th >= gray.height)
        fail(ErrorKind::Geometry,
             strfmt("template %dx%d does not fit strictly inside frame %dx%d", tw, th,
                    gray.width, gray.height));

    // Placement range: template fully inside frame and inside `search`.
    SearchArea area;
    area.x0 = 0;
    area.y0 = 0;
    int x1 = gray.width - tw;   // inclusive max placement
    int y1 = gray.height - th;
    if (search) {
        area.x0 = std::max(area.x0, search->x);
        area.y0 = std::max(area.y0, search->y);
        x1 = std::min(x1, search->x + search->w - tw);
        y1 = std::min(y1, search->y + search->h - th);
    }
    if (x1 < area.x0 || y1 < area.y0)
        fail(ErrorKind::Geometry, "search rectangle admits no full template placement");
    area.w = x1 - area.x0 + 1;
    area.h = y1 - area.y0 + 1;

    // Template statistics once; window statistics from integral images so
    // the per-placement work is only the correlation sum.
    size_t npix = size_t(tw) * th;
    double t_mean = 0.0;
    for (uint8_t v : patch.plane[0]) t_mean += v;
    t_mean /= double(npix);
    std::vector<double> t_centered(npix);
    double t_var_sum = 0.0;
    for (size_t i = 0; i < npix; ++i) {
        t_centered[i] = double(patch.plane[0][i]) - t_mean;
        t_var_sum += t_centered[i] * t_centered[i];
    }

    int w = gray.width, h = gray.height;
    const uint8_t* img = gray.plane[0].data();
    // Integral images with a zero row/column border; exact in uint64.
    std::vector<uint64_t> isum(size_t(w + 1) * (h + 1), 0);
    std::vector<uint64_t> isum2(size_t(w + 1) * (h + 1), 0);
    for (int y = 0; y < h; ++y) {
        uint64_t row = 0, row2 = 0;
        for (int x = 0; x < w; ++x) {
            uint64_t v = img[size_t(y) * w + x];
            row += v;
            row2 += v * v;
            size_t i = size_t(y + 1) * (w + 1) + (x + 1);
            isum[i] = isum[i - (w + 1)] + row;
            isum2[i] = isum2[i - (w + 1)] + row2;
        }
    }
    auto window_sums = [&](int u, int v, uint64_t& s, uint64_t& s2) {
        size_t a = size_t(v) * (w + 1) + u;
        size_t b = size_t(v) * (w + 1) + (u + tw);
        size_t c = size_t(v + th) * (w + 1) + u;
        size_t d = size_t(v + th) * (w + 1) + (u + tw);
        s = isum[d] + isum[a] - isum[b] - isum[c];
        s2 = isum2[d] + isum2[a] - isum2[b] - isum2[c];
    };

    std::vector<double> score_map(size_t(area.w) * area.h);
    double best = -2.0;
    int best_u = area.x0, best_v = area.y0;
    for (int vy = 0; vy < area.h; ++vy) {
        int v = area.y0 + vy;
        for (int vx = 0; vx < area.w; ++vx) {
            int u = area.x0 + vx;
            uint64_t wsum, wsum2;
            window_sums(u, v, wsum, wsum2);
            double w_var_sum = double(wsum2) - double(wsum) * double(wsum) / double(npix);
            double score = 0.0;
            if (w_var_sum > 1e-12) {
                // sum(T' * W) == sum(T' * (W - mean W)) because sum(T') = 0.
                double num = 0.0;
                const double* tc = t_centered.data();
                for (int y = 0; y < th; ++y) {
                    const uint8_t* row = img + size_t(v + y) * w + u;
                    for (int x = 0; x < tw; ++x) num += tc[size_t(y) * tw + x] * double(row[x]);
                }
                score = num / std::sqrt(t_var_sum * w_var_sum);
            }
            score_map[size_t(vy) * area.w + vx] = score;
            if (score > best) {
                best = score;
                best_u = u;
                best_v = v;
            }
        }
    }

    MatchResult res;
    res.peak_x = best_u;
    res.peak_y = best_v;
    res.score = best;
    res.map_w = area.w;
    res.map_h = area.h;
    int px = best_u - area.x0, py = best_v - area.y0;
    double dx = 0.0, dy = 0.0;
    if (px > 0 && px < area.w - 1)
        dx = parabolic_offset(score_map[size_t(py) * area.w + px - 1], best,
                              score_map[size_t(py) * area.w + px + 1]);
    if (py > 0 && py < area.h - 1)
        dy = parabolic_offset(score_map[size_t(py - 1) * area.w + px], best,
                              score_map[size_t(py + 1) * area.w + px]);
    res.x = best_u + dx;
    res.y = best_v + dy;
    return res;
}

SequenceTracker::SequenceTracker(Template tmpl, TrackerConfig cfg, const ClipHeader& header)
    : tmpl_(std::move(tmpl)), cfg_(cfg), header_(header) {
    if (cfg_.lock_threshold < -1.0 || cfg_.lock_threshold > 1.0)
        fail(ErrorKind::Config, "lock_threshold must lie in [-1, 1]");
    if (cfg_.search_radius_px <= 0) fail(ErrorKind::Config, "search_radius_px must be positive");
}

TrackPoint SequenceTracker::push(const Frame& frame) {
    Frame gray = to_gray(frame);
    TrackPoint pt;
    pt.frame_index = int64_t(points_.size());
    pt.t = header_.frame_time(pt.frame_index);

    bool first = points_.empty();
    TrackStatus prev_status = first ? TrackStatus::Locked : points_.back().status;

    std::optional<MatchResult> windowed;
    if (!first) {
        const TrackPoint& prev = points_.back();
        // Window sized so candidate centers cover prev +- radius.
        int r = cfg_.search_radius_px;
        int ux = int(std::floor(prev.x - tmpl_.anchor_x)) - r;
        int uy = int(std::floor(prev.y - tmpl_.anchor_y)) - r;
        Rect rect{ux, uy, tmpl_.patch.width + 2 * r + 1, tmpl_.patch.height + 2 * r + 1};
        rect.x = std::max(rect.x, 0);
        rect.y = std::max(rect.y, 0);
        rect.w = std::min(rect.w, frame.width - rect.x);
        rect.h = std::min(rect.h, frame.height - rect.y);
        if (rect.w >= tmpl_.patch.width && rect.h >= tmpl_.patch.height)
            windowed = match_template(gray, tmpl_, rect);
    }

    MatchResult used;
    bool by_fallback = false;
    if (windowed && windowed->score >= cfg_.lock_threshold) {
        used = *windowed;
    } else {
        used = match_template(gray, tmpl_);
        by_fallback = !first;
    }
    if (used.score >= cfg_.lock_threshold) {
        bool reacquired = !first && (prev_status == TrackStatus::Lost || by_fallback);
        pt.status = reacquired ? TrackStatus::Reacquired : TrackStatus::Locked;
    } else {
        pt.status = TrackStatus::Lost;
    }

    if (pt.status == TrackStatus::Lost && !first) {
        pt.x = points_.back().x;  // hold position so the series has no holes
        pt.y = points_.back().y;
        pt.score = used.score;
    } else {
        pt.x = used.x + tmpl_.anchor_x;
        pt.y = used.y + tmpl_.anchor_y;
        pt.score = used.score;
    }
    points_.push_back(pt);
    return pt;
}

std::vector<TrackPoint> track_sequence(std::span<const Frame> frames, const Template& tmpl,
                                       const TrackerConfig& cfg, const ClipHeader& header) {
    SequenceTracker tracker(tmpl, cfg, header);
    for (const Frame& f : frames) tracker.push(f);
    return tracker.points();
}

void save_track_csv(const std::string& path, std::span<const TrackPoint> track) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, strfmt("cannot open '%s' for writing", path.c_str()));
    out << "frame_idx,t_sec,x_px,y_px,score,status\n";
    for (const TrackPoint& p : track)
        out << strfmt("%lld,%.6f,%.6f,%.6f,%.6f,%s\n", (long long)p.frame_index, p.t, p.x, p.y,
                      p.score, track_status_name(p.status));
    if (!out) fail(ErrorKind::Io, strfmt("failed writing '%s'", path.c_str()));
}

std::vector<TrackPoint> load_track_csv(const std::string& path) {
    CsvTable table = read_csv_file(path);
    size_t ci = table.col("frame_idx", path), ct = table.col("t_sec", path),
           cx = table.col("x_px", path), cy = table.col("y_px", path),
           cs = table.col("score", path), cst = table.col("status", path);
    std::vector<TrackPoint> track;
    track.reserve(table.rows.size());
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        try {
            TrackPoint p;
            p.frame_index = std::stoll(row[ci]);
            p.t = std::stod(row[ct]);
            p.x = std::stod(row[cx]);
            p.y = std::stod(row[cy]);
            p.score = std::stod(row[cs]);
            p.status = track_status_from_name(row[cst]);
            track.push_back(p);
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            fail(ErrorKind::Format, strfmt("%s: bad numeric field in row %zu", path.c_str(), r + 1));
        }
    }
    if (track.empty()) fail(ErrorKind::Data, strfmt("%s: no track rows", path.c_str()));
    return track;
}

}  // namespace aimtrace
