#include "image_io.h"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.h"
#include "strfmt.h"

namespace fs = std::filesystem;

namespace aimtrace {

namespace {

std::string lower_ext(const std::string& path) {
    std::string ext = fs::path(path).extension().string();
    for (char& c : ext) c = char(std::tolower(uint8_t(c)));
    return ext;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Frame load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail(ErrorKind::Io, strfmt("cannot open '%s' for reading", path.c_str()));

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorKind::Internal, "libpng allocation failed");
    }
    std::vector<png_bytep> rows;
    Frame out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorKind::Format, strfmt("'%s' is not a valid png file", path.c_str()));
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    color = png_get_color_type(png, info);
    bool gray = color == PNG_COLOR_TYPE_GRAY;
    out = Frame::make(int(w), int(h), gray ? PixelFormat::Gray8 : PixelFormat::Rgb24);
    size_t stride = size_t(w) * (gray ? 1 : 3);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = out.plane[0].data() + size_t(y) * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void save_png(const Frame& frame, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) fail(ErrorKind::Io, strfmt("cannot open '%s' for writing", path.c_str()));

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorKind::Internal, "libpng allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorKind::Io, strfmt("failed writing png '%s'", path.c_str()));
    }
    png_init_io(png, fp.get());
    bool gray = frame.format == PixelFormat::Gray8;
    png_set_IHDR(png, info, png_uint_32(frame.width), png_uint_32(frame.height), 8,
                 gray ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    size_t stride = size_t(frame.width) * (gray ? 1 : 3);
    for (int y = 0; y < frame.height; ++y)
        png_write_row(png, const_cast<png_bytep>(frame.plane[0].data() + size_t(y) * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Frame load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, strfmt("cannot open '%s' for reading", path.c_str()));
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P6")
        fail(ErrorKind::Format, strfmt("'%s': only binary P5/P6 pnm is handled", path.c_str()));
    auto next_int = [&in, &path] {
        // Skip whitespace and '#' comment lines between header fields.
        for (;;) {
            int c = in.peek();
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        long v = -1;
        in >> v;
        if (!in || v <= 0)
            fail(ErrorKind::Format, strfmt("'%s': malformed pnm header", path.c_str()));
        return v;
    };
    long w = next_int(), h = next_int(), maxval = next_int();
    if (maxval != 255)
        fail(ErrorKind::Unsupported, strfmt("'%s': only maxval 255 pnm is handled", path.c_str()));
    in.get();  // single whitespace after maxval
    Frame out = Frame::make(int(w), int(h),
                            magic == "P5" ? PixelFormat::Gray8 : PixelFormat::Rgb24);
    in.read(reinterpret_cast<char*>(out.plane[0].data()), std::streamsize(out.plane[0].size()));
    if (size_t(in.gcount()) != out.plane[0].size())
        fail(ErrorKind::Format, strfmt("'%s': truncated pnm payload", path.c_str()));
    return out;
}

void save_pnm(const Frame& frame, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, strfmt("cannot open '%s' for writing", path.c_str()));
    bool gray = frame.format == PixelFormat::Gray8;
    std::string header =
        strfmt("%s\n%d %d\n255\n", gray ? "P5" : "P6", frame.width, frame.height);
    out.write(header.data(), std::streamsize(header.size()));
    out.write(reinterpret_cast<const char*>(frame.plane[0].data()),
              std::streamsize(frame.plane[0].size()));
    if (!out) fail(ErrorKind::Io, strfmt("failed writing '%s'", path.c_str()));
}

std::string pattern_name(const std::string& pattern, int64_t index) {
    if (pattern.find('%') == std::string::npos)
        fail(ErrorKind::Config,
             strfmt("index pattern '%s' has no %%d placeholder", pattern.c_str()));
    return strfmt(pattern.c_str(), int(index));
}

}  // namespace

Frame load_image(const std::string& path) {
    std::string ext = lower_ext(path);
    Frame out;
    if (ext == ".png")
        out = load_png(path);
    else if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm")
        out = load_pnm(path);
    else
        fail(ErrorKind::Unsupported,
             strfmt("unrecognized image extension '%s' (use .png/.pgm/.ppm)", ext.c_str()));
    return out;
}

void save_image(const Frame& frame, const std::string& path) {
    if (frame.format == PixelFormat::Yuv420) {
        save_image(to_rgb(frame), path);
        return;
    }
    std::string ext = lower_ext(path);
    if (ext == ".png") {
        save_png(frame, path);
    } else if (ext == ".pgm") {
        if (frame.format != PixelFormat::Gray8)
            fail(ErrorKind::Config, "pgm stores gray8 only; use .ppm or .png for color");
        save_pnm(frame, path);
    } else if (ext == ".ppm") {
        save_pnm(frame.format == PixelFormat::Rgb24 ? frame : to_rgb(frame), path);
    } else {
        fail(ErrorKind::Unsupported,
             strfmt("unrecognized image extension '%s' (use .png/.pgm/.ppm)", ext.c_str()));
    }
}

Clip read_image_sequence(const std::string& dir, const std::string& pattern) {
    fs::path base(dir);
    fs::path meta_path = base / "frames.json";
    std::ifstream meta_in(meta_path);
    if (!meta_in)
        fail(ErrorKind::Io, strfmt("missing sidecar '%s'", meta_path.string().c_str()));
    nlohmann::json meta;
    try {
        meta_in >> meta;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Format, strfmt("bad json in '%s': %s", meta_path.string().c_str(), e.what()));
    }
    if (!meta.contains("fps") || !meta["fps"].is_number())
        fail(ErrorKind::Format,
             strfmt("'%s' must contain a numeric \"fps\" key", meta_path.string().c_str()));
    double fps = meta["fps"].get<double>();
    if (fps <= 0) fail(ErrorKind::Data, "fps must be positive");
    double start_time = meta.value("start_time", 0.0);

    Clip clip;
    // Rationalize fps with millihertz resolution; exact for integer rates.
    int64_t num = std::llround(fps * 1000.0), den = 1000;
    int64_t g = std::gcd(num, den);
    clip.header.fps_num = int(num / g);
    clip.header.fps_den = int(den / g);

    for (int64_t i = 0;; ++i) {
        fs::path file = base / pattern_name(pattern, i);
        if (!fs::exists(file)) {
            if (fs::exists(base / pattern_name(pattern, i + 1)))
                fail(ErrorKind::Data,
                     strfmt("missing frame %lld ('%s') in sequence", (long long)i,
                            file.string().c_str()));
            break;
        }
        Frame frame = load_image(file.string());
        frame.index = i;
        frame.pts_seconds = start_time + double(i) * clip.header.fps_den / clip.header.fps_num;
        if (i == 0) {
            clip.header.width = frame.width;
            clip.header.height = frame.height;
            clip.header.format = frame.format;
        } else if (frame.width != clip.header.width || frame.height != clip.header.height ||
                   frame.format != clip.header.format) {
            fail(ErrorKind::Data,
                 strfmt("frame %lld is %dx%d %s, expected %dx%d %s", (long long)i, frame.width,
                        frame.height, pixel_format_name(frame.format), clip.header.width,
                        clip.header.height, pixel_format_name(clip.header.format)));
        }
        clip.frames.push_back(std::move(frame));
    }
    if (clip.frames.empty())
        fail(ErrorKind::Data, strfmt("no frames matching '%s' under '%s' (index starts at 0)",
                                     pattern.c_str(), dir.c_str()));
    clip.header.frame_count = int64_t(clip.frames.size());
    return clip;
}

void write_image_sequence(const Clip& clip, const std::string& dir, const std::string& pattern) {
    fs::path base(dir);
    fs::create_directories(base);
    for (size_t i = 0; i < clip.frames.size(); ++i)
        save_image(clip.frames[i], (base / pattern_name(pattern, int64_t(i))).string());
    nlohmann::json meta;
    meta["fps"] = clip.header.fps();
    std::ofstream out(base / "frames.json");
    out << meta.dump(2) << "\n";
    if (!out) fail(ErrorKind::Io, strfmt("failed writing sidecar under '%s'", dir.c_str()));
}

}  // namespace aimtrace
