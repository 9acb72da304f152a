#include "kinematics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "csv.h"
#include "error.h"
#include "strfmt.h"

namespace aimtrace {

void MetricsConfig::validate() const {
    if (window_s <= 0) fail(ErrorKind::Config, "window_s must be positive");
    if (smooth_alpha <= 0 || smooth_alpha > 1)
        fail(ErrorKind::Config, "smooth_alpha must lie in (0, 1]");
    if (recoil_threshold && *recoil_threshold <= 0)
        fail(ErrorKind::Config, "recoil_threshold must be positive");
    if (refractory_s < 0) fail(ErrorKind::Config, "refractory_s must be non-negative");
    if (px_per_mrad < 0) fail(ErrorKind::Config, "px_per_mrad must be non-negative");
}

std::vector<AimSample> derive_series(std::span<const TrackPoint> track, const ClipHeader& header,
                                     const MetricsConfig& cfg) {
    cfg.validate();
    if (track.empty()) fail(ErrorKind::Data, "derive_series: empty track");
    header.validate();

    Vec2 aim = cfg.aimpoint.value_or(Vec2{header.width / 2.0, header.height / 2.0});
    double fps = header.fps();
    size_t n = track.size();
    // Spatial unit conversion; applied uniformly so every reported quantity
    // shares one unit system.
    double unit = cfg.px_per_mrad > 0 ? 1.0 / cfg.px_per_mrad : 1.0;

    // Raw offsets come from the tracked centers; an optional exponential
    // smoothing of the positions feeds the difference chain only.
    std::vector<AimSample> out(n);
    std::vector<double> sx(n), sy(n);
    double a = cfg.smooth_alpha;
    for (size_t i = 0; i < n; ++i) {
        sx[i] = i == 0 ? track[i].x : a * track[i].x + (1 - a) * sx[i - 1];
        sy[i] = i == 0 ? track[i].y : a * track[i].y + (1 - a) * sy[i - 1];
    }

    for (size_t i = 0; i < n; ++i) {
        AimSample& s = out[i];
        s.frame_index = track[i].frame_index;
        s.t = track[i].t;
        s.valid = track[i].status != TrackStatus::Lost;
        s.dx = (track[i].x - aim.x) * unit;
        s.dy = (track[i].y - aim.y) * unit;
        s.r = std::sqrt(s.dx * s.dx + s.dy * s.dy);
        if (i >= 1) {
            s.vx = (sx[i] - sx[i - 1]) * fps * unit;
            s.vy = (sy[i] - sy[i - 1]) * fps * unit;
        }
        s.speed = std::sqrt(s.vx * s.vx + s.vy * s.vy);
        if (i >= 2) {
            s.ax = (s.vx - out[i - 1].vx) * fps;
            s.ay = (s.vy - out[i - 1].vy) * fps;
        }
        s.amag = std::sqrt(s.ax * s.ax + s.ay * s.ay);
    }

    // Trailing windows over (t_i - W, t_i]; two pointers keep this linear.
    size_t lo = 0;
    for (size_t i = 0; i < n; ++i) {
        while (out[lo].t <= out[i].t - cfg.window_s) ++lo;
        size_t count = i - lo + 1;
        double sum_r = 0.0, cx = 0.0, cy = 0.0;
        for (size_t j = lo; j <= i; ++j) {
            sum_r += out[j].r;
            cx += out[j].dx;
            cy += out[j].dy;
        }
        cx /= double(count);
        cy /= double(count);
        double spread = 0.0;
        for (size_t j = lo; j <= i; ++j) {
            double ex = out[j].dx - cx, ey = out[j].dy - cy;
            spread += ex * ex + ey * ey;
        }
        out[i].acc_w = sum_r / double(count);
        out[i].prec_w = std::sqrt(spread / double(count));
    }
    return out;
}

namespace {

double median_of(std::vector<double> values) {
    size_t n = values.size();
    auto mid = values.begin() + n / 2;
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2) return *mid;
    double hi = *mid;
    double lo = *std::max_element(values.begin(), mid);
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<ShotEvent> detect_shots(std::span<const AimSample> series, const MetricsConfig& cfg) {
    cfg.validate();
    std::vector<ShotEvent> events;
    if (series.size() < 3) return events;

    double threshold;
    if (cfg.recoil_threshold) {
        threshold = *cfg.recoil_threshold;
    } else {
        std::vector<double> amag(series.size());
        for (size_t i = 0; i < series.size(); ++i) amag[i] = series[i].amag;
        double med = median_of(amag);
        for (double& v : amag) v = std::abs(v - med);
        double mad = median_of(std::move(amag));
        threshold = std::max(8.0 * 1.4826 * mad, 1e-6);
    }

    double last_event_t = -std::numeric_limits<double>::infinity();
    size_t i = 0;
    while (i < series.size()) {
        if (series[i].amag <= threshold || series[i].t < last_event_t + cfg.refractory_s) {
            ++i;
            continue;
        }
        size_t peak = i;
        size_t j = i;
        while (j < series.size() && series[j].amag > threshold) {
            if (series[j].amag > series[peak].amag) peak = j;
            ++j;
        }
        events.push_back({series[peak].frame_index, series[peak].t, series[peak].amag});
        last_event_t = series[peak].t;
        i = j;
    }
    return events;
}

std::vector<StabilizationOffset> stabilization_offsets(std::span<const TrackPoint> track,
                                                       const ClipHeader& header) {
    header.validate();
    std::vector<StabilizationOffset> out;
    out.reserve(track.size());
    double cx = header.width / 2.0, cy = header.height / 2.0;
    for (size_t i = 0; i < track.size(); ++i) {
        StabilizationOffset s;
        s.frame_index = track[i].frame_index;
        if (track[i].status == TrackStatus::Lost && !out.empty()) {
            s.sx = out.back().sx;
            s.sy = out.back().sy;
        } else {
            s.sx = int(std::lround(cx - track[i].x));
            s.sy = int(std::lround(cy - track[i].y));
        }
        out.push_back(s);
    }
    return out;
}

void save_series_csv(const std::string& path, std::span<const AimSample> series,
                     std::span<const ShotEvent> shots) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, strfmt("cannot open '%s' for writing", path.c_str()));
    std::vector<char> shot_flag(series.size(), 0);
    for (const ShotEvent& e : shots)
        for (size_t i = 0; i < series.size(); ++i)
            if (series[i].frame_index == e.frame_index) shot_flag[i] = 1;
    out << "frame_idx,t_sec,dx,dy,r,vx,vy,speed,ax,ay,amag,acc_w,prec_w,valid,shot_flag\n";
    for (size_t i = 0; i < series.size(); ++i) {
        const AimSample& s = series[i];
        out << strfmt("%lld,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%d\n",
                      (long long)s.frame_index, s.t, s.dx, s.dy, s.r, s.vx, s.vy, s.speed, s.ax,
                      s.ay, s.amag, s.acc_w, s.prec_w, s.valid ? 1 : 0, int(shot_flag[i]));
    }
    if (!out) fail(ErrorKind::Io, strfmt("failed writing '%s'", path.c_str()));
}

std::vector<AimSample> load_series_csv(const std::string& path, std::vector<ShotEvent>* shots) {
    CsvTable t = read_csv_file(path);
    auto c = [&](const char* name) { return t.col(name, path); };
    size_t ci = c("frame_idx"), ct = c("t_sec"), cdx = c("dx"), cdy = c("dy"), cr = c("r"),
           cvx = c("vx"), cvy = c("vy"), csp = c("speed"), cax = c("ax"), cay = c("ay"),
           cam = c("amag"), cac = c("acc_w"), cpr = c("prec_w"), cva = c("valid"),
           csh = c("shot_flag");
    std::vector<AimSample> series;
    series.reserve(t.rows.size());
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        try {
            AimSample s;
            s.frame_index = std::stoll(row[ci]);
            s.t = std::stod(row[ct]);
            s.dx = std::stod(row[cdx]);
            s.dy = std::stod(row[cdy]);
            s.r = std::stod(row[cr]);
            s.vx = std::stod(row[cvx]);
            s.vy = std::stod(row[cvy]);
            s.speed = std::stod(row[csp]);
            s.ax = std::stod(row[cax]);
            s.ay = std::stod(row[cay]);
            s.amag = std::stod(row[cam]);
            s.acc_w = std::stod(row[cac]);
            s.prec_w = std::stod(row[cpr]);
            s.valid = std::stoi(row[cva]) != 0;
            if (shots && std::stoi(row[csh]) != 0)
                shots->push_back({s.frame_index, s.t, s.amag});
            series.push_back(s);
        } catch (const std::exception&) {
            fail(ErrorKind::Format, strfmt("%s: bad numeric field in row %zu", path.c_str(), r + 1));
        }
    }
    if (series.empty()) fail(ErrorKind::Data, strfmt("%s: no metric rows", path.c_str()));
    return series;
}

void save_shots_json(const std::string& path, std::span<const ShotEvent> shots) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ShotEvent& e : shots)
        arr.push_back({{"frame_index", e.frame_index}, {"t", e.t}, {"peak_amag", e.peak_amag}});
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, strfmt("cannot open '%s' for writing", path.c_str()));
    out << nlohmann::json{{"shots", arr}}.dump(2) << "\n";
    if (!out) fail(ErrorKind::Io, strfmt("failed writing '%s'", path.c_str()));
}

std::vector<ShotEvent> load_shots_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, strfmt("cannot open '%s' for reading", path.c_str()));
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Format, strfmt("bad json in '%s': %s", path.c_str(), e.what()));
    }
    std::vector<ShotEvent> shots;
    for (const auto& item : doc.value("shots", nlohmann::json::array()))
        shots.push_back({item.value("frame_index", int64_t(0)), item.value("t", 0.0),
                         item.value("peak_amag", 0.0)});
    return shots;
}

}  // namespace aimtrace
