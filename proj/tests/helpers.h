#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "core/frame.h"
#include "core/tracker.h"

namespace test_helpers {

// Unique scratch directory under the build tree, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("aimtrace_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline aimtrace::Frame random_frame(int w, int h, aimtrace::PixelFormat fmt, std::mt19937& rng) {
    aimtrace::Frame f = aimtrace::Frame::make(w, h, fmt);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int p = 0; p < f.plane_count(); ++p)
        for (auto& v : f.plane[p]) v = uint8_t(byte(rng));
    return f;
}

// Track that follows given positions exactly, all frames locked.
inline std::vector<aimtrace::TrackPoint> track_from_positions(
    const std::vector<aimtrace::Vec2>& positions, double fps) {
    std::vector<aimtrace::TrackPoint> track;
    for (size_t i = 0; i < positions.size(); ++i)
        track.push_back({int64_t(i), double(i) / fps, positions[i].x, positions[i].y, 1.0,
                         aimtrace::TrackStatus::Locked});
    return track;
}

}  // namespace test_helpers
