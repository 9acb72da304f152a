#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "core/error.h"
#include "core/kinematics.h"
#include "helpers.h"

using namespace aimtrace;
using test_helpers::TempDir;
using test_helpers::track_from_positions;

namespace {

ClipHeader header_640(int fps = 30) {
    ClipHeader h;
    h.width = 640;
    h.height = 480;
    h.fps_num = fps;
    h.fps_den = 1;
    h.format = PixelFormat::Gray8;
    return h;
}

}  // namespace

// =============================================================================
// derive_series
// =============================================================================

TEST_CASE("constant center: no motion, accuracy equals distance, zero spread") {
    std::vector<Vec2> pos(60, Vec2{330.0, 250.0});  // offset (10, 10) from center
    auto track = track_from_positions(pos, 30.0);
    auto series = derive_series(track, header_640(), MetricsConfig{});
    REQUIRE(series.size() == 60);
    double r = std::sqrt(200.0);
    for (const AimSample& s : series) {
        CHECK(s.vx == 0.0);
        CHECK(s.vy == 0.0);
        CHECK(s.speed == 0.0);
        CHECK(s.amag == 0.0);
        CHECK(s.prec_w == doctest::Approx(0.0));
        CHECK(s.acc_w == doctest::Approx(r));
        CHECK(s.r == doctest::Approx(r));
    }
}

TEST_CASE("linear motion: backward differences recover the slope") {
    std::vector<Vec2> pos;
    for (int i = 0; i < 45; ++i) pos.push_back({100.0 + 2.0 * i, 240.0});
    auto track = track_from_positions(pos, 30.0);
    auto series = derive_series(track, header_640(), MetricsConfig{});
    CHECK(series[0].speed == 0.0);
    for (size_t i = 1; i < series.size(); ++i) {
        CHECK(series[i].vx == doctest::Approx(60.0));
        CHECK(series[i].speed == doctest::Approx(60.0));
    }
    CHECK(series[0].amag == 0.0);  // pinned start values
    CHECK(series[1].amag == 0.0);
    for (size_t i = 2; i < series.size(); ++i) CHECK(series[i].amag == doctest::Approx(0.0));
}

TEST_CASE("sinusoidal offset: peak speed within 2% of the analytic derivative") {
    const double amplitude = 20.0, freq = 0.3, fps = 30.0;
    std::vector<Vec2> pos;
    for (int i = 0; i < int(10 * fps); ++i) {
        double t = i / fps;
        pos.push_back({320.0 + amplitude * std::sin(2.0 * M_PI * freq * t), 240.0});
    }
    auto series = derive_series(track_from_positions(pos, fps), header_640(), MetricsConfig{});
    double peak = 0.0;
    for (const AimSample& s : series) peak = std::max(peak, s.speed);
    double analytic = 2.0 * M_PI * freq * amplitude;  // ~37.70 px/s
    CHECK(peak == doctest::Approx(analytic).epsilon(0.02));
}

TEST_CASE("windowed statistics are order-free and well-defined") {
    std::mt19937 rng(44);
    std::uniform_real_distribution<double> jitter(-15.0, 15.0);
    std::vector<Vec2> pos;
    for (int i = 0; i < 90; ++i) pos.push_back({320.0 + jitter(rng), 240.0 + jitter(rng)});
    auto series = derive_series(track_from_positions(pos, 30.0), header_640(), MetricsConfig{});

    // Recompute acc/prec for a sample directly from its window.
    size_t i = 75;
    std::vector<size_t> window;
    for (size_t j = 0; j <= i; ++j)
        if (series[j].t > series[i].t - 1.0) window.push_back(j);
    double acc = 0.0, cx = 0.0, cy = 0.0;
    for (size_t j : window) {
        acc += series[j].r;
        cx += series[j].dx;
        cy += series[j].dy;
    }
    acc /= double(window.size());
    cx /= double(window.size());
    cy /= double(window.size());
    double spread = 0.0;
    for (size_t j : window) {
        double ex = series[j].dx - cx, ey = series[j].dy - cy;
        spread += ex * ex + ey * ey;
    }
    double prec = std::sqrt(spread / double(window.size()));
    CHECK(series[i].acc_w == doctest::Approx(acc));
    CHECK(series[i].prec_w == doctest::Approx(prec));
    CHECK(window.size() == 30);  // 1 s window at 30 fps
}

TEST_CASE("prec_w is zero exactly when window offsets are identical") {
    std::vector<Vec2> pos(50, Vec2{300.0, 200.0});
    pos[10] = {301.0, 200.0};  // single disturbance
    auto series = derive_series(track_from_positions(pos, 30.0), header_640(), MetricsConfig{});
    CHECK(series[5].prec_w == doctest::Approx(0.0));
    CHECK(series[10].prec_w > 0.0);
    CHECK(series[20].prec_w > 0.0);   // disturbance still inside the 1 s window
    CHECK(series[45].prec_w == 0.0);  // disturbance aged out wholly (30-sample window)
}

TEST_CASE("smoothing only affects the difference chain") {
    std::vector<Vec2> pos;
    for (int i = 0; i < 30; ++i) pos.push_back({100.0 + (i % 2 ? 4.0 : 0.0), 100.0});
    MetricsConfig cfg;
    cfg.smooth_alpha = 0.2;
    auto smoothed = derive_series(track_from_positions(pos, 30.0), header_640(), cfg);
    auto raw = derive_series(track_from_positions(pos, 30.0), header_640(), MetricsConfig{});
    // Offsets stay raw; velocities shrink.
    CHECK(smoothed[9].dx == doctest::Approx(raw[9].dx));
    double steady_raw = 0.0, steady_smooth = 0.0;
    for (size_t i = 10; i < 30; ++i) {
        steady_raw = std::max(steady_raw, raw[i].speed);
        steady_smooth = std::max(steady_smooth, smoothed[i].speed);
    }
    CHECK(steady_smooth < steady_raw);
}

TEST_CASE("px_per_mrad rescales every spatial output") {
    std::vector<Vec2> pos;
    for (int i = 0; i < 20; ++i) pos.push_back({330.0 + i, 240.0});
    MetricsConfig cfg;
    cfg.px_per_mrad = 2.0;
    auto series = derive_series(track_from_positions(pos, 30.0), header_640(), cfg);
    auto plain = derive_series(track_from_positions(pos, 30.0), header_640(), MetricsConfig{});
    CHECK(series[5].dx == doctest::Approx(plain[5].dx / 2.0));
    CHECK(series[5].r == doctest::Approx(plain[5].r / 2.0));
    CHECK(series[5].speed == doctest::Approx(plain[5].speed / 2.0));
}

TEST_CASE("empty track is an error; lost points mark invalid samples") {
    CHECK_THROWS_AS(derive_series({}, header_640(), MetricsConfig{}), Error);
    std::vector<TrackPoint> track{{0, 0.0, 1, 1, 0.9, TrackStatus::Locked},
                                  {1, 0.1, 1, 1, 0.1, TrackStatus::Lost}};
    auto series = derive_series(track, header_640(), MetricsConfig{});
    CHECK(series[0].valid);
    CHECK_FALSE(series[1].valid);
}

// =============================================================================
// detect_shots
// =============================================================================

namespace {

// Aim positions with recoil-like kicks at the given frames.
std::vector<Vec2> positions_with_kicks(int n, double fps, const std::vector<int>& kick_frames,
                                       double kick_px, double tremor_px, std::mt19937& rng) {
    std::uniform_real_distribution<double> jitter(-tremor_px, tremor_px);
    std::vector<Vec2> pos(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = 320.0 + (tremor_px > 0 ? jitter(rng) : 0.0);
        double y = 240.0 + (tremor_px > 0 ? jitter(rng) : 0.0);
        for (int k : kick_frames) {
            if (i < k) continue;
            double dt = double(i - k) / fps;
            y -= kick_px * std::exp(-dt / 0.4);
        }
        pos[size_t(i)] = {x, y};
    }
    return pos;
}

}  // namespace

TEST_CASE("shots at known frames are found within one frame") {
    std::mt19937 rng(2);
    const double fps = 30.0;
    std::vector<int> kicks{300, 750, 1200};
    auto pos = positions_with_kicks(1500, fps, kicks, 60.0, 2.0, rng);
    auto series = derive_series(track_from_positions(pos, fps), header_640(), MetricsConfig{});
    auto events = detect_shots(series, MetricsConfig{});
    REQUIRE(events.size() == 3);
    for (size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(double(events[k].frame_index - kicks[k])) <= 1.0);
        CHECK(events[k].peak_amag > 0.0);
    }
    // Refractory ordering invariant.
    for (size_t k = 1; k < events.size(); ++k)
        CHECK(events[k].t - events[k - 1].t >= MetricsConfig{}.refractory_s);
}

TEST_CASE("tremor-only and constant series produce no events") {
    std::mt19937 rng(3);
    auto tremor = positions_with_kicks(900, 30.0, {}, 0.0, 2.5, rng);
    auto series = derive_series(track_from_positions(tremor, 30.0), header_640(), MetricsConfig{});
    CHECK(detect_shots(series, MetricsConfig{}).empty());

    std::vector<Vec2> flat(900, Vec2{320.0, 240.0});
    auto flat_series =
        derive_series(track_from_positions(flat, 30.0), header_640(), MetricsConfig{});
    CHECK(detect_shots(flat_series, MetricsConfig{}).empty());
}

TEST_CASE("shot detection ignores a constant offset shift") {
    std::mt19937 rng(4);
    auto pos = positions_with_kicks(600, 30.0, {200, 420}, 50.0, 1.5, rng);
    auto series = derive_series(track_from_positions(pos, 30.0), header_640(), MetricsConfig{});

    std::vector<Vec2> shifted = pos;
    for (Vec2& p : shifted) {
        p.x += 37.0;
        p.y += 11.0;
    }
    auto series2 =
        derive_series(track_from_positions(shifted, 30.0), header_640(), MetricsConfig{});
    auto a = detect_shots(series, MetricsConfig{});
    auto b = detect_shots(series2, MetricsConfig{});
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].frame_index == b[i].frame_index);
}

TEST_CASE("manual threshold and refractory are honored") {
    std::mt19937 rng(5);
    auto pos = positions_with_kicks(300, 30.0, {100, 104}, 60.0, 0.0, rng);  // 0.13 s apart
    auto series = derive_series(track_from_positions(pos, 30.0), header_640(), MetricsConfig{});
    MetricsConfig cfg;
    cfg.recoil_threshold = 1000.0;
    auto events = detect_shots(series, cfg);
    CHECK(events.size() == 1);  // second kick lands inside the refractory window
}

TEST_CASE("short series yields no events") {
    std::vector<Vec2> pos(2, Vec2{1, 1});
    auto series = derive_series(track_from_positions(pos, 30.0), header_640(), MetricsConfig{});
    CHECK(detect_shots(series, MetricsConfig{}).empty());
}

// =============================================================================
// stabilization
// =============================================================================

TEST_CASE("stabilization shift arithmetic") {
    ClipHeader h;
    h.width = 64;
    h.height = 48;
    h.fps_num = 30;
    h.fps_den = 1;
    h.format = PixelFormat::Gray8;

    std::vector<TrackPoint> track{{0, 0.0, 32.0, 24.0, 1.0, TrackStatus::Locked},
                                  {1, 0.1, 20.0, 12.0, 1.0, TrackStatus::Locked},
                                  {2, 0.2, 20.0, 12.0, 0.1, TrackStatus::Lost}};
    auto shifts = stabilization_offsets(track, h);
    CHECK(shifts[0].sx == 0);
    CHECK(shifts[0].sy == 0);
    CHECK(shifts[1].sx == 12);
    CHECK(shifts[1].sy == 12);
    CHECK(shifts[2].sx == 12);  // lost frame reuses the previous shift
    CHECK(shifts[2].sy == 12);
}

TEST_CASE("applying the shift centers the tracked point within half a pixel") {
    ClipHeader h;
    h.width = 95;  // odd on purpose: center is fractional
    h.height = 63;
    h.fps_num = 30;
    h.fps_den = 1;
    h.format = PixelFormat::Gray8;
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> anywhere(15.0, 45.0);
    std::vector<TrackPoint> track;
    for (int i = 0; i < 50; ++i)
        track.push_back({i, i / 30.0, anywhere(rng), anywhere(rng), 1.0, TrackStatus::Locked});
    auto shifts = stabilization_offsets(track, h);
    for (int i = 0; i < 50; ++i) {
        double cx = track[size_t(i)].x + shifts[size_t(i)].sx;
        double cy = track[size_t(i)].y + shifts[size_t(i)].sy;
        CHECK(std::abs(cx - 95 / 2.0) <= 0.5);
        CHECK(std::abs(cy - 63 / 2.0) <= 0.5);
    }
}

// =============================================================================
// serialization
// =============================================================================

TEST_CASE("series csv round-trips samples and shot flags") {
    TempDir dir("series");
    std::mt19937 rng(7);
    auto pos = positions_with_kicks(400, 30.0, {150}, 60.0, 1.0, rng);
    auto series = derive_series(track_from_positions(pos, 30.0), header_640(), MetricsConfig{});
    auto shots = detect_shots(series, MetricsConfig{});
    REQUIRE(shots.size() == 1);

    save_series_csv(dir.file("m.csv"), series, shots);
    std::vector<ShotEvent> shots_back;
    auto back = load_series_csv(dir.file("m.csv"), &shots_back);
    REQUIRE(back.size() == series.size());
    CHECK(back[200].r == doctest::Approx(series[200].r).epsilon(1e-5));
    CHECK(back[200].amag == doctest::Approx(series[200].amag).epsilon(1e-4));
    REQUIRE(shots_back.size() == 1);
    CHECK(shots_back[0].frame_index == shots[0].frame_index);

    save_shots_json(dir.file("s.json"), shots);
    auto shots_json = load_shots_json(dir.file("s.json"));
    REQUIRE(shots_json.size() == 1);
    CHECK(shots_json[0].frame_index == shots[0].frame_index);
    CHECK(shots_json[0].peak_amag == doctest::Approx(shots[0].peak_amag));
}
