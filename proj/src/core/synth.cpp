#include "synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "csv.h"
#include "error.h"
#include "prng.h"
#include "strfmt.h"

namespace aimtrace {

namespace {

using nlohmann::json;

// Recoil kick direction (unit): mostly up in image coordinates with a small
// lateral component, the apparent motion of the target when the muzzle rises.
constexpr double kRecoilDirX = 0.2 / 1.0198039027185569;  // normalize((0.2, -1))
constexpr double kRecoilDirY = -1.0 / 1.0198039027185569;

// Independent noise streams derived from one master seed.
constexpr uint64_t kTremorStream = 0x74726d72ull;  // "trmr"
constexpr uint64_t kNoiseStream = 0x6e6f6973ull;   // "nois"

double num_field(const json& j, const char* key, double fallback, const std::string& context) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        fail(ErrorKind::Format, strfmt("%s: '%s' must be a number", context.c_str(), key));
    return j.at(key).get<double>();
}

}  // namespace

ScenarioSpec ScenarioSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, strfmt("cannot open '%s' for reading", path.c_str()));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text, path);
}

ScenarioSpec ScenarioSpec::from_json_text(const std::string& text, const std::string& context) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Format, strfmt("bad json in %s: %s", context.c_str(), e.what()));
    }
    ScenarioSpec s;
    s.duration_s = num_field(j, "duration_s", s.duration_s, context);
    s.fps = num_field(j, "fps", s.fps, context);
    s.width = int(num_field(j, "width", s.width, context));
    s.height = int(num_field(j, "height", s.height, context));
    s.noise_sigma = num_field(j, "noise_sigma", s.noise_sigma, context);
    s.background = int(num_field(j, "background", s.background, context));
    if (j.contains("marker")) {
        const json& m = j["marker"];
        s.marker.size_px = int(num_field(m, "size_px", s.marker.size_px, context));
        s.marker.band_px = int(num_field(m, "band_px", s.marker.band_px, context));
    }
    if (j.contains("tremor")) {
        const json& t = j["tremor"];
        s.tremor.rms_px = num_field(t, "rms_px", s.tremor.rms_px, context);
        s.tremor.bandwidth_hz = num_field(t, "bandwidth_hz", s.tremor.bandwidth_hz, context);
        s.tremor.seed = uint64_t(num_field(t, "seed", double(s.tremor.seed), context));
    }
    if (j.contains("breathing")) {
        const json& b = j["breathing"];
        s.breathing.amplitude_px = num_field(b, "amplitude_px", s.breathing.amplitude_px, context);
        s.breathing.freq_hz = num_field(b, "freq_hz", s.breathing.freq_hz, context);
        s.breathing.axis_deg = num_field(b, "axis_deg", s.breathing.axis_deg, context);
    }
    if (j.contains("drift")) {
        const json& d = j["drift"];
        s.drift.x_px_s = num_field(d, "x_px_s", 0.0, context);
        s.drift.y_px_s = num_field(d, "y_px_s", 0.0, context);
    }
    if (j.contains("shots")) {
        if (!j["shots"].is_array())
            fail(ErrorKind::Format, strfmt("%s: 'shots' must be an array", context.c_str()));
        for (const json& sh : j["shots"]) {
            ShotSpec spec;
            spec.t = num_field(sh, "t", -1.0, context);
            spec.recoil_px = num_field(sh, "recoil_px", spec.recoil_px, context);
            spec.recover_s = num_field(sh, "recover_s", spec.recover_s, context);
            s.shots.push_back(spec);
        }
    }
    return s;
}

std::string ScenarioSpec::to_json_text() const {
    json j;
    j["duration_s"] = duration_s;
    j["fps"] = fps;
    j["width"] = width;
    j["height"] = height;
    j["marker"] = {{"size_px", marker.size_px}, {"band_px", marker.band_px}};
    j["tremor"] = {{"rms_px", tremor.rms_px},
                   {"bandwidth_hz", tremor.bandwidth_hz},
                   {"seed", tremor.seed}};
    j["breathing"] = {{"amplitude_px", breathing.amplitude_px},
                      {"freq_hz", breathing.freq_hz},
                      {"axis_deg", breathing.axis_deg}};
    j["drift"] = {{"x_px_s", drift.x_px_s}, {"y_px_s", drift.y_px_s}};
    j["noise_sigma"] = noise_sigma;
    j["background"] = background;
    j["shots"] = json::array();
    for (const ShotSpec& s : shots)
        j["shots"].push_back({{"t", s.t}, {"recoil_px", s.recoil_px}, {"recover_s", s.recover_s}});
    return j.dump(2);
}

void ScenarioSpec::validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
        fail(ErrorKind::Data, strfmt("scenario: %s %s", field.c_str(), why.c_str()));
    };
    if (fps <= 0) bad("fps", "must be positive");
    if (duration_s <= 0) bad("duration_s", "must be positive");
    if (width <= 0 || height <= 0) bad("width/height", "must be positive");
    if (width % 2 || height % 2) bad("width/height", "must be even (yuv420 output)");
    if (marker.size_px < 3 || marker.size_px % 2 == 0) bad("marker.size_px", "must be odd and >= 3");
    if (marker.band_px < 1) bad("marker.band_px", "must be >= 1");
    if (marker.size_px >= std::min(width, height)) bad("marker.size_px", "must fit inside the frame");
    if (tremor.rms_px < 0) bad("tremor.rms_px", "must be non-negative");
    if (tremor.bandwidth_hz <= 0) bad("tremor.bandwidth_hz", "must be positive");
    if (breathing.amplitude_px < 0) bad("breathing.amplitude_px", "must be non-negative");
    if (breathing.freq_hz < 0) bad("breathing.freq_hz", "must be non-negative");
    if (noise_sigma < 0) bad("noise_sigma", "must be non-negative");
    if (background < 0 || background > 255) bad("background", "must lie in [0, 255]");

    double max_recoil = 0.0;
    double prev_t = -1.0;
    for (size_t k = 0; k < shots.size(); ++k) {
        const ShotSpec& s = shots[k];
        std::string field = strfmt("shots[%zu]", k);
        if (s.t < 0 || s.t >= duration_s) bad(field + ".t", "must lie in [0, duration_s)");
        if (s.t <= prev_t) bad(field + ".t", "must be strictly increasing");
        if (s.recoil_px < 0) bad(field + ".recoil_px", "must be non-negative");
        if (s.recover_s <= 0) bad(field + ".recover_s", "must be positive");
        prev_t = s.t;
        max_recoil = std::max(max_recoil, s.recoil_px);
    }

    // Marker centered at frame center must keep this much room to the edge.
    double margin_needed = max_recoil + 3.0 * tremor.rms_px;
    double half = (marker.size_px - 1) / 2.0;
    double margin = std::min(width / 2.0, height / 2.0) - half - 1;
    if (margin < margin_needed)
        bad("marker.size_px",
            strfmt("leaves %.1f px margin, need >= %.1f (max recoil + 3*tremor rms)", margin,
                   margin_needed));
}

int64_t ScenarioSpec::frame_count() const {
    return int64_t(duration_s * fps);
}

int ScenarioSpec::fps_num() const {
    int64_t num = llround(fps * 1000.0);
    int64_t g = std::gcd(num, int64_t(1000));
    return int(num / g);
}

int ScenarioSpec::fps_den() const {
    int64_t num = llround(fps * 1000.0);
    int64_t g = std::gcd(num, int64_t(1000));
    return int(1000 / g);
}

ClipHeader ScenarioSpec::clip_header() const {
    ClipHeader h;
    h.width = width;
    h.height = height;
    h.fps_num = fps_num();
    h.fps_den = fps_den();
    h.format = PixelFormat::Gray8;
    h.frame_count = frame_count();
    return h;
}

TruthLog generate_trajectory(const ScenarioSpec& spec) {
    spec.validate();
    int64_t n = spec.frame_count();
    TruthLog truth;
    truth.t.resize(size_t(n));
    truth.center.resize(size_t(n));
    for (int64_t i = 0; i < n; ++i)
        truth.t[size_t(i)] = double(i) * spec.fps_den() / spec.fps_num();

    // Tremor: white Gaussian through a one-pole low-pass, then mean-centered
    // and rescaled so the radial RMS equals rms_px exactly.
    std::vector<double> tx(size_t(n), 0.0), ty(size_t(n), 0.0);
    if (spec.tremor.rms_px > 0 && n > 1) {
        GaussianSampler noise(SplitMix64{spec.tremor.seed ^ kTremorStream}.next());
        double alpha = 1.0 - std::exp(-2.0 * M_PI * spec.tremor.bandwidth_hz / spec.fps);
        alpha = std::clamp(alpha, 1e-6, 1.0);
        double fx = 0.0, fy = 0.0;
        for (int64_t i = 0; i < n; ++i) {
            fx += alpha * (noise.next() - fx);
            fy += alpha * (noise.next() - fy);
            tx[size_t(i)] = fx;
            ty[size_t(i)] = fy;
        }
        double mx = std::accumulate(tx.begin(), tx.end(), 0.0) / double(n);
        double my = std::accumulate(ty.begin(), ty.end(), 0.0) / double(n);
        double power = 0.0;
        for (int64_t i = 0; i < n; ++i) {
            tx[size_t(i)] -= mx;
            ty[size_t(i)] -= my;
            power += tx[size_t(i)] * tx[size_t(i)] + ty[size_t(i)] * ty[size_t(i)];
        }
        double rms = std::sqrt(power / double(n));
        double scale = rms > 0 ? spec.tremor.rms_px / rms : 0.0;
        for (int64_t i = 0; i < n; ++i) {
            tx[size_t(i)] *= scale;
            ty[size_t(i)] *= scale;
        }
    }

    double cx = spec.width / 2.0, cy = spec.height / 2.0;
    double axis = spec.breathing.axis_deg * M_PI / 180.0;
    double bx = std::cos(axis), by = std::sin(axis);
    for (int64_t i = 0; i < n; ++i) {
        double t = truth.t[size_t(i)];
        double sway = spec.breathing.amplitude_px *
                      std::sin(2.0 * M_PI * spec.breathing.freq_hz * t);
        double x = cx + tx[size_t(i)] + bx * sway + spec.drift.x_px_s * t;
        double y = cy + ty[size_t(i)] + by * sway + spec.drift.y_px_s * t;
        for (const ShotSpec& shot : spec.shots) {
            if (t < shot.t) break;  // shot times are sorted
            double decay = std::exp(-(t - shot.t) / shot.recover_s);
            x += shot.recoil_px * kRecoilDirX * decay;
            y += shot.recoil_px * kRecoilDirY * decay;
        }
        truth.center[size_t(i)] = {x, y};
    }
    for (const ShotSpec& shot : spec.shots) truth.shot_times.push_back(shot.t);
    return truth;
}

Frame render_marker(const MarkerSpec& marker) {
    Frame patch = Frame::make(marker.size_px, marker.size_px, PixelFormat::Gray8);
    int half = (marker.size_px - 1) / 2;
    for (int y = 0; y < marker.size_px; ++y) {
        for (int x = 0; x < marker.size_px; ++x) {
            int ring = std::max(std::abs(x - half), std::abs(y - half));
            patch.gray_at(x, y) = (ring / marker.band_px) % 2 ? 255 : 0;
        }
    }
    return patch;
}

Frame render_synth_frame(const ScenarioSpec& spec, const TruthLog& truth, int64_t index) {
    if (index < 0 || size_t(index) >= truth.center.size())
        fail(ErrorKind::Data, strfmt("frame index %lld outside truth log", (long long)index));
    Frame frame = Frame::make(spec.width, spec.height, PixelFormat::Gray8);
    frame.index = index;
    frame.pts_seconds = truth.t[size_t(index)];
    std::fill(frame.plane[0].begin(), frame.plane[0].end(), uint8_t(spec.background));

    Frame marker = render_marker(spec.marker);
    int half = (spec.marker.size_px - 1) / 2;
    Vec2 c = truth.center[size_t(index)];
    int ox = int(std::lround(c.x)) - half;
    int oy = int(std::lround(c.y)) - half;
    for (int y = 0; y < marker.height; ++y) {
        int fy = oy + y;
        if (fy < 0 || fy >= frame.height) continue;
        for (int x = 0; x < marker.width; ++x) {
            int fx = ox + x;
            if (fx < 0 || fx >= frame.width) continue;
            frame.gray_at(fx, fy) = marker.gray_at(x, y);
        }
    }

    if (spec.noise_sigma > 0) {
        // Per-frame stream keeps frames independently renderable.
        GaussianSampler noise(
            SplitMix64{spec.tremor.seed ^ kNoiseStream ^ (0x9E3779B97F4A7C15ull * uint64_t(index + 1))}
                .next());
        for (uint8_t& v : frame.plane[0]) {
            int nv = int(v) + int(std::lround(noise.next() * spec.noise_sigma));
            v = uint8_t(std::clamp(nv, 0, 255));
        }
    }
    return frame;
}

Clip render_clip(const ScenarioSpec& spec, const TruthLog& truth) {
    if (truth.center.size() != size_t(spec.frame_count()))
        fail(ErrorKind::Data, "truth log does not match the scenario frame count");
    Clip clip;
    clip.header = spec.clip_header();
    clip.frames.reserve(truth.center.size());
    for (int64_t i = 0; i < int64_t(truth.center.size()); ++i)
        clip.frames.push_back(render_synth_frame(spec, truth, i));
    return clip;
}

void save_truth_csv(const std::string& path, const TruthLog& truth) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, strfmt("cannot open '%s' for writing", path.c_str()));
    out << "frame_idx,t,true_x,true_y\n";
    for (size_t i = 0; i < truth.center.size(); ++i)
        out << strfmt("%zu,%.6f,%.6f,%.6f\n", i, truth.t[i], truth.center[i].x,
                      truth.center[i].y);
    if (!out) fail(ErrorKind::Io, strfmt("failed writing '%s'", path.c_str()));
}

TruthLog load_truth_csv(const std::string& path) {
    CsvTable t = read_csv_file(path);
    size_t ct = t.col("t", path), cx = t.col("true_x", path), cy = t.col("true_y", path);
    TruthLog truth;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        try {
            truth.t.push_back(std::stod(t.rows[r][ct]));
            truth.center.push_back({std::stod(t.rows[r][cx]), std::stod(t.rows[r][cy])});
        } catch (const std::exception&) {
            fail(ErrorKind::Format, strfmt("%s: bad numeric field in row %zu", path.c_str(), r + 1));
        }
    }
    return truth;
}

void save_truth_shots_json(const std::string& path, const TruthLog& truth) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, strfmt("cannot open '%s' for writing", path.c_str()));
    out << nlohmann::json{{"shot_times_s", truth.shot_times}}.dump(2) << "\n";
    if (!out) fail(ErrorKind::Io, strfmt("failed writing '%s'", path.c_str()));
}

}  // namespace aimtrace
