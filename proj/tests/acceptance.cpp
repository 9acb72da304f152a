// Acceptance suite. Each criterion prints one PASS/FAIL line; the process
// exits with the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aimtrace.h"
#include "core/compose.h"
#include "core/error.h"
#include "core/kinematics.h"
#include "core/pairstats.h"
#include "core/prng.h"
#include "core/synth.h"
#include "core/tracker.h"
#include "core/y4m.h"
#include "oracles.h"

using namespace aimtrace;
namespace stats = aimtrace::stats;

namespace {

struct Criterion {
    std::string id;
    std::string what;
    std::function<void(std::string&)> run;  // throws or appends to the note on failure
};

struct CheckFail : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw CheckFail(what);
}

std::string data_file(const std::string& name) {
    return std::string(DATA_DIR) + "/" + name;
}

std::vector<TrackPoint> track_from_truth(const TruthLog& truth) {
    std::vector<TrackPoint> track;
    for (size_t i = 0; i < truth.center.size(); ++i)
        track.push_back({int64_t(i), truth.t[i], truth.center[i].x, truth.center[i].y, 1.0,
                         TrackStatus::Locked});
    return track;
}

uint64_t file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    expect(bool(in), "cannot reopen " + path);
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= uint8_t(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// C1: Table 2/3 reproduction of D, zeta, and significance verdicts
// ---------------------------------------------------------------------------

void criterion_table_reproduction(std::string& note) {
    struct Row {
        const char* file;
        double d;
        std::optional<int> df;
        double caption_threshold;
    };
    const Row rows[] = {
        {"pairwise_novice.csv", 32.32, std::nullopt, 9.448},
        {"pairwise_expert.csv", 22.72, std::nullopt, 9.448},
        {"pairwise_all.csv", 53.76, 9, 16.919},
    };
    for (const Row& row : rows) {
        stats::PreferenceData data = stats::load_preferences_csv(data_file(row.file));
        stats::PairwiseReport report = stats::analyze_preferences(data, 0.05, row.df);
        expect(std::abs(report.equality.d_statistic - row.d) <= 0.01,
               std::string(row.file) + ": D off target");
        expect(report.zeta_group == 1.0, std::string(row.file) + ": zeta_group != 1");
        for (double z : report.zeta_per_judge)
            expect(z == 1.0, std::string(row.file) + ": some judge inconsistent");
        expect(report.equality.significant, std::string(row.file) + ": verdict not significant");
        // Verdict against the quoted caption thresholds.
        expect(report.equality.d_statistic >= row.caption_threshold,
               std::string(row.file) + ": D below the caption threshold");
    }
    // chi-squared(9, 0.05) quoted as 16.919 in the caption.
    expect(std::abs(stats::chi_squared_quantile(0.95, 9) - 16.919) <= 0.01,
           "chi2(9,0.05) quantile off");
    note = "D = 32.32 / 22.72 / 53.76, zeta = 1, all significant";
}

// ---------------------------------------------------------------------------
// C2: grouping rows at alpha = 0.05
// ---------------------------------------------------------------------------

void criterion_grouping(std::string& note) {
    auto group_names = [](const stats::PairwiseReport& r) {
        std::vector<std::vector<std::string>> out;
        for (const auto& g : r.grouping.groups) {
            std::vector<std::string> names;
            for (int idx : g) names.push_back(r.labels[size_t(idx)]);
            out.push_back(names);
        }
        return out;
    };
    using Groups = std::vector<std::vector<std::string>>;

    stats::PairwiseReport novice =
        stats::analyze_preferences(stats::load_preferences_csv(data_file("pairwise_novice.csv")));
    expect(novice.threshold_r == 10, "novice R != 10");
    expect(group_names(novice) ==
               Groups{{"Vis5", "Vis4"}, {"Vis4", "Vis2", "Vis3"}, {"Vis3", "Vis1"}},
           "novice grouping mismatch");

    stats::PairwiseReport expert =
        stats::analyze_preferences(stats::load_preferences_csv(data_file("pairwise_expert.csv")));
    expect(expert.threshold_r == 10, "expert R != 10");
    expect(group_names(expert) == Groups{{"Vis5", "Vis2", "Vis4", "Vis3"}, {"Vis3", "Vis1"}},
           "expert grouping mismatch");

    stats::PairwiseReport all =
        stats::analyze_preferences(stats::load_preferences_csv(data_file("pairwise_all.csv")));
    expect(all.threshold_r == 14, "combined R != 14");
    expect(group_names(all) == Groups{{"Vis5"}, {"Vis4", "Vis2", "Vis3"}, {"Vis1"}},
           "combined grouping mismatch");
    note = "R = 10 / 10 / 14; all three grouping rows match";
}

// ---------------------------------------------------------------------------
// C3: tracker fidelity on the 30 s reference scenario
// ---------------------------------------------------------------------------

void criterion_tracker_fidelity(std::string& note) {
    ScenarioSpec spec = ScenarioSpec::from_json_file(data_file("scenario_shots.json"));
    TruthLog truth = generate_trajectory(spec);
    Template tmpl = Template::create(render_marker(spec.marker));

    SequenceTracker tracker(tmpl, TrackerConfig{}, spec.clip_header());
    double err_sum = 0.0;
    int64_t n = spec.frame_count();
    int outside_not_locked = 0;
    auto in_excursion = [&](double t) {
        for (const ShotSpec& s : spec.shots)
            if (t >= s.t - 1.0 / spec.fps && t <= s.t + s.recover_s) return true;
        return false;
    };
    for (int64_t i = 0; i < n; ++i) {
        TrackPoint p = tracker.push(render_synth_frame(spec, truth, i));
        err_sum += std::hypot(p.x - truth.center[size_t(i)].x, p.y - truth.center[size_t(i)].y);
        if (!in_excursion(p.t) && p.status != TrackStatus::Locked) ++outside_not_locked;
    }
    double mean_err = err_sum / double(n);
    expect(mean_err <= 1.0, "mean tracking error " + std::to_string(mean_err) + " px > 1");
    expect(outside_not_locked == 0,
           std::to_string(outside_not_locked) + " frames not locked outside recoil excursions");
    note = "mean err " + std::to_string(mean_err).substr(0, 5) + " px, locked everywhere outside recoil";
}

// ---------------------------------------------------------------------------
// C4: shot detection across a randomized scenario suite
// ---------------------------------------------------------------------------

void criterion_shot_detection(std::string& note) {
    Xoshiro256pp rng(20240810);
    int checked_events = 0;
    for (int rep = 0; rep < 20; ++rep) {
        ScenarioSpec spec;
        spec.width = 320;
        spec.height = 240;
        spec.fps = 30.0;
        spec.duration_s = 8.0 + 4.0 * rng.next_double();
        spec.tremor.rms_px = 1.0 + 2.0 * rng.next_double();
        spec.tremor.bandwidth_hz = 1.0 + 2.0 * rng.next_double();
        spec.tremor.seed = rng.next();
        spec.noise_sigma = 2.0 * rng.next_double();
        int shot_count = 1 + int(rng.next() % 4);
        double t = 1.0;
        for (int k = 0; k < shot_count; ++k) {
            t += 0.8 + rng.next_double() * ((spec.duration_s - 1.0 - t) / (shot_count - k) - 0.8);
            if (t >= spec.duration_s - 0.5) break;
            spec.shots.push_back({t, 40.0 + 40.0 * rng.next_double(),
                                  0.3 + 0.2 * rng.next_double()});
        }
        TruthLog truth = generate_trajectory(spec);

        std::vector<TrackPoint> track;
        if (rep < 3) {
            // A few scenarios go through the full video + tracker path.
            SequenceTracker tracker(Template::create(render_marker(spec.marker)),
                                    TrackerConfig{}, spec.clip_header());
            for (int64_t i = 0; i < spec.frame_count(); ++i)
                tracker.push(render_synth_frame(spec, truth, i));
            track = tracker.points();
        } else {
            track = track_from_truth(truth);
        }
        auto series = derive_series(track, spec.clip_header(), MetricsConfig{});
        auto events = detect_shots(series, MetricsConfig{});
        expect(events.size() == spec.shots.size(),
               "scenario " + std::to_string(rep) + ": " + std::to_string(events.size()) +
                   " events for " + std::to_string(spec.shots.size()) + " shots");
        for (size_t k = 0; k < events.size(); ++k) {
            double truth_frame = spec.shots[k].t * spec.fps;
            expect(std::abs(double(events[k].frame_index) - truth_frame) <= 1.0,
                   "scenario " + std::to_string(rep) + ": event " + std::to_string(k) +
                       " off by more than one frame");
            ++checked_events;
        }
    }
    // Tremor-only scenarios must stay quiet.
    for (int rep = 0; rep < 5; ++rep) {
        ScenarioSpec spec;
        spec.width = 320;
        spec.height = 240;
        spec.fps = 30.0;
        spec.duration_s = 10.0;
        spec.tremor.rms_px = 1.0 + 2.0 * rng.next_double();
        spec.tremor.seed = rng.next();
        TruthLog truth = generate_trajectory(spec);
        auto series =
            derive_series(track_from_truth(truth), spec.clip_header(), MetricsConfig{});
        expect(detect_shots(series, MetricsConfig{}).empty(),
               "tremor-only scenario " + std::to_string(rep) + " produced events");
    }
    note = "20 scenarios (" + std::to_string(checked_events) +
           " shots within one frame), 5 tremor-only quiet";
}

// ---------------------------------------------------------------------------
// C5: kinematics against analytic derivatives
// ---------------------------------------------------------------------------

void criterion_kinematics_oracle(std::string& note) {
    const double fps = 30.0;
    for (auto [amplitude, freq] : {std::pair{20.0, 0.3}, {10.0, 0.5}, {30.0, 0.2}}) {
        ScenarioSpec spec;
        spec.width = 640;
        spec.height = 480;
        spec.fps = fps;
        spec.duration_s = 12.0;
        spec.breathing.amplitude_px = amplitude;
        spec.breathing.freq_hz = freq;
        spec.breathing.axis_deg = 90.0;
        TruthLog truth = generate_trajectory(spec);
        auto series =
            derive_series(track_from_truth(truth), spec.clip_header(), MetricsConfig{});
        double peak = 0.0;
        for (const AimSample& s : series) peak = std::max(peak, s.speed);
        double analytic = 2.0 * M_PI * freq * amplitude;
        expect(std::abs(peak - analytic) / analytic <= 0.02,
               "peak speed off by more than 2% for A=" + std::to_string(amplitude));
    }

    // Constant trajectory: derivatives identically zero.
    std::vector<TrackPoint> flat;
    for (int i = 0; i < 90; ++i)
        flat.push_back({i, i / fps, 100.0, 80.0, 1.0, TrackStatus::Locked});
    ClipHeader header;
    header.width = 320;
    header.height = 240;
    header.fps_num = 30;
    header.fps_den = 1;
    header.format = PixelFormat::Gray8;
    auto series = derive_series(flat, header, MetricsConfig{});
    for (const AimSample& s : series) {
        expect(s.speed == 0.0 && s.amag == 0.0, "constant trajectory has nonzero derivative");
        expect(s.prec_w == 0.0, "constant trajectory has nonzero spread");
    }

    // prec_w = 0 iff window offsets identical.
    std::vector<TrackPoint> wobble = flat;
    wobble[45].x += 0.25;
    auto wobble_series = derive_series(wobble, header, MetricsConfig{});
    expect(wobble_series[45].prec_w > 0.0, "disturbed window reports zero spread");
    expect(wobble_series[89].prec_w == 0.0, "clean window reports nonzero spread");
    note = "peak speeds within 2% of 2*pi*f*A; zero cases exact";
}

// ---------------------------------------------------------------------------
// C6: stabilization check on the composed Vis2 output
// ---------------------------------------------------------------------------

void criterion_stabilization(std::string& note) {
    ScenarioSpec spec = ScenarioSpec::from_json_file(data_file("scenario_basic.json"));
    spec.duration_s = 8.0;
    TruthLog truth = generate_trajectory(spec);
    Clip clip = render_clip(spec, truth);
    Template tmpl = Template::create(render_marker(spec.marker));
    auto track = track_sequence(clip.frames, tmpl, TrackerConfig{}, clip.header);
    auto series = derive_series(track, clip.header, MetricsConfig{});
    auto shots = detect_shots(series, MetricsConfig{});

    VisualizationRenderer renderer(VisId::Vis2, clip.header, track, series, shots,
                                   RenderConfig{});
    const Placement* video_slot = nullptr;
    for (const Placement& p : renderer.layout().placements)
        if (p.slot == "video") video_slot = &p;
    expect(video_slot != nullptr, "vis2 layout lacks a video slot");
    double cx = video_slot->dst.x + spec.width / 2.0;
    double cy = video_slot->dst.y + spec.height / 2.0;

    std::vector<Frame> out;
    out.reserve(clip.frames.size());
    for (const Frame& f : clip.frames) {
        Frame o = renderer.render_frame(f);
        o.index = f.index;
        out.push_back(to_gray(o));
    }
    auto retrack = track_sequence(out, tmpl, TrackerConfig{}, renderer.output_header());
    int checked = 0;
    for (size_t i = 0; i < retrack.size(); ++i) {
        if (retrack[i].status == TrackStatus::Lost) continue;
        expect(std::abs(retrack[i].x - cx) <= 0.5 && std::abs(retrack[i].y - cy) <= 0.5,
               "frame " + std::to_string(i) + " re-tracked off the video-slot center");
        ++checked;
    }
    expect(checked > int(retrack.size()) * 9 / 10, "too few locked frames in the re-track");
    note = std::to_string(checked) + "/" + std::to_string(retrack.size()) +
           " frames re-track to the slot center within 0.5 px";
}

// ---------------------------------------------------------------------------
// C7: determinism of the full chain through the C API
// ---------------------------------------------------------------------------

void criterion_determinism(std::string& note) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "aimtrace_acceptance_c7";
    fs::remove_all(dir);
    fs::create_directories(dir);

    std::ifstream scenario_in(data_file("scenario_basic.json"));
    std::stringstream scenario_text;
    scenario_text << scenario_in.rdbuf();

    auto run_chain = [&](const std::string& tag) {
        std::vector<uint64_t> digests;
        at_scenario* scenario = nullptr;
        expect(at_scenario_parse(scenario_text.str().c_str(), &scenario) == AT_OK,
               at_last_error());
        at_clip* clip = nullptr;
        at_truth* truth = nullptr;
        std::string tpl = (dir / (tag + "_tpl.png")).string();
        expect(at_synth_run(scenario, &clip, &truth, tpl.c_str()) == AT_OK, at_last_error());
        std::string clip_path = (dir / (tag + "_clip.y4m")).string();
        expect(at_clip_save(clip, clip_path.c_str()) == AT_OK, at_last_error());
        std::string truth_path = (dir / (tag + "_truth.csv")).string();
        expect(at_truth_save_csv(truth, truth_path.c_str()) == AT_OK, at_last_error());

        at_template* tmpl = nullptr;
        expect(at_template_load(tpl.c_str(), NAN, NAN, &tmpl) == AT_OK, at_last_error());
        at_track* track = nullptr;
        expect(at_track_run(clip, tmpl, nullptr, &track) == AT_OK, at_last_error());
        std::string track_path = (dir / (tag + "_track.csv")).string();
        expect(at_track_save_csv(track, track_path.c_str()) == AT_OK, at_last_error());

        at_clip_info info;
        at_clip_get_info(clip, &info);
        at_series* series = nullptr;
        expect(at_metrics_run(track, &info, nullptr, &series) == AT_OK, at_last_error());
        std::string metrics_path = (dir / (tag + "_metrics.csv")).string();
        expect(at_series_save_csv(series, metrics_path.c_str()) == AT_OK, at_last_error());

        digests.push_back(file_digest(clip_path));
        digests.push_back(file_digest(truth_path));
        digests.push_back(file_digest(track_path));
        digests.push_back(file_digest(metrics_path));
        for (int vis = 1; vis <= 5; ++vis) {
            at_render_config rc;
            at_render_config_init(&rc, vis);
            at_clip* rendered = nullptr;
            expect(at_render_run(clip, track, series, &rc, &rendered) == AT_OK, at_last_error());
            std::string out_path = (dir / (tag + "_vis" + std::to_string(vis) + ".y4m")).string();
            expect(at_clip_save(rendered, out_path.c_str()) == AT_OK, at_last_error());
            digests.push_back(file_digest(out_path));
            at_clip_free(rendered);
        }
        at_series_free(series);
        at_track_free(track);
        at_template_free(tmpl);
        at_truth_free(truth);
        at_clip_free(clip);
        at_scenario_free(scenario);
        return digests;
    };

    auto first = run_chain("a");
    auto second = run_chain("b");
    expect(first == second, "file digests differ between identical runs");
    fs::remove_all(dir);
    note = std::to_string(first.size()) + " output files byte-identical across two runs";
}

// ---------------------------------------------------------------------------
// C8: oracle equivalence
// ---------------------------------------------------------------------------

void criterion_oracles(std::string& note) {
    // Template matching vs brute force on 200 random instances.
    std::mt19937 rng(8675309);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int rep = 0; rep < 200; ++rep) {
        int w = 16 + int(rng() % 49), h = 16 + int(rng() % 49);
        int tw = 4 + int(rng() % 9), th = 4 + int(rng() % 9);
        Frame img = Frame::make(w, h, PixelFormat::Gray8);
        for (auto& v : img.plane[0]) v = uint8_t(byte(rng));
        Frame patch = Frame::make(tw, th, PixelFormat::Gray8);
        for (auto& v : patch.plane[0]) v = uint8_t(byte(rng));
        Template tmpl = Template::create(patch);
        MatchResult res = match_template(img, tmpl);
        auto oracle = test_oracles::ncc_oracle(img, patch);
        expect(res.peak_x == oracle.x && res.peak_y == oracle.y,
               "ncc argmax mismatch at rep " + std::to_string(rep));
        expect(std::abs(res.score - oracle.score) <= 1e-9,
               "ncc score beyond 1e-9 at rep " + std::to_string(rep));
    }

    // Circular triads vs exhaustive triples on 500 random matrices.
    for (int rep = 0; rep < 500; ++rep) {
        int t = 3 + int(rng() % 4);
        stats::PreferenceMatrix m = stats::PreferenceMatrix::zeros(t);
        for (int i = 0; i < t; ++i)
            for (int j = i + 1; j < t; ++j) {
                if (rng() & 1)
                    m.set(i, j, 1);
                else
                    m.set(j, i, 1);
            }
        expect(stats::circular_triads(m) == test_oracles::triads_oracle(m),
               "triad count mismatch at rep " + std::to_string(rep));
    }

    // Exact rank-test p-values vs enumeration on small inputs.
    std::uniform_int_distribution<int> small(0, 4);
    for (int rep = 0; rep < 150; ++rep) {
        std::vector<double> a(1 + rng() % 5), b(1 + rng() % 5);
        for (double& v : a) v = small(rng);
        for (double& v : b) v = small(rng);
        auto res = stats::mann_whitney_u(a, b);
        expect(res.exact, "mwu not exact on a small input");
        expect(std::abs(res.p - test_oracles::mwu_p_oracle(a, b)) <= 1e-12,
               "mwu p mismatch at rep " + std::to_string(rep));
    }
    std::uniform_int_distribution<int> signedv(-3, 3);
    for (int rep = 0; rep < 150; ++rep) {
        std::vector<double> x(2 + rng() % 9), y(x.size(), 0.0);
        bool any = false;
        for (double& v : x) {
            v = signedv(rng);
            any = any || v != 0.0;
        }
        if (!any) x[0] = 1.0;
        auto res = stats::wilcoxon_signed_rank(x, y);
        expect(res.exact, "wilcoxon not exact on a small input");
        expect(std::abs(res.p - test_oracles::wilcoxon_p_oracle(x, y)) <= 1e-12,
               "wilcoxon p mismatch at rep " + std::to_string(rep));
    }
    note = "ncc x200, triads x500, mwu/wilcoxon x150 each: all equal";
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"C1", "published D values, zeta, significance verdicts", criterion_table_reproduction},
        {"C2", "grouping rows at alpha 0.05 (R = 10 / 14)", criterion_grouping},
        {"C3", "tracker fidelity on the 30 s shot scenario", criterion_tracker_fidelity},
        {"C4", "shot detection across the randomized suite", criterion_shot_detection},
        {"C5", "kinematics vs analytic derivatives", criterion_kinematics_oracle},
        {"C6", "vis2 stabilization re-track", criterion_stabilization},
        {"C7", "byte-identical chain outputs across runs", criterion_determinism},
        {"C8", "brute-force oracle equivalence", criterion_oracles},
    };

    int failures = 0;
    for (auto& criterion : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string note;
        bool ok = true;
        std::string why;
        try {
            criterion.run(note);
        } catch (const std::exception& e) {
            ok = false;
            why = e.what();
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        // Runtime bounds from the criteria themselves.
        if (ok && criterion.id == "C1" && secs >= 1.0) {
            ok = false;
            why = "exceeded the 1 s budget";
        }
        if (ok && criterion.id == "C2" && secs >= 1.0) {
            ok = false;
            why = "exceeded the 1 s budget";
        }
        if (ok && criterion.id == "C3" && secs >= 60.0) {
            ok = false;
            why = "exceeded the 60 s budget";
        }
        if (!ok) ++failures;
        std::printf("[%s] %s: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", criterion.id.c_str(),
                    criterion.what.c_str(), secs, ok ? (note.empty() ? "" : " -- ") : " -- ",
                    ok ? note.c_str() : why.c_str());
        std::fflush(stdout);
    }
    if (failures == 0)
        std::printf("acceptance: all %zu criteria passed\n", criteria.size());
    else
        std::printf("acceptance: %d of %zu criteria FAILED\n", failures, criteria.size());
    return failures;
}
