#include "y4m.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "error.h"
#include "strfmt.h"

namespace aimtrace {

namespace {

constexpr const char* kSignature = "YUV4MPEG2";
constexpr size_t kMaxHeaderLine = 2048;

long parse_positive(const std::string& tag, const std::string& text, uint64_t offset) {
    try {
        size_t pos = 0;
        long v = std::stol(text, &pos);
        if (pos != text.size() || v <= 0) throw std::invalid_argument("range");
        return v;
    } catch (const std::exception&) {
        fail(ErrorKind::Format,
             strfmt("bad %s tag '%s' in stream header near byte %llu", tag.c_str(),
                    text.c_str(), (unsigned long long)offset));
    }
}

}  // namespace

Y4mReader::Y4mReader(std::istream& in) : in_(in) {
    std::string line;
    char c;
    while (in_.get(c)) {
        ++offset_;
        if (c == '\n') break;
        line.push_back(c);
        if (line.size() > kMaxHeaderLine)
            fail(ErrorKind::Format, "stream header line exceeds 2048 bytes");
    }
    if (line.empty() && !in_)
        fail(ErrorKind::Format, "empty stream, no YUV4MPEG2 signature at byte 0");

    std::istringstream tokens(line);
    std::string tok;
    tokens >> tok;
    if (tok != kSignature)
        fail(ErrorKind::Format,
             strfmt("missing YUV4MPEG2 signature at byte 0 (found '%s')", tok.c_str()));

    bool have_w = false, have_h = false, have_f = false;
    std::string colorspace = "420jpeg";  // y4m default
    while (tokens >> tok) {
        if (tok.empty()) continue;
        char key = tok[0];
        std::string val = tok.substr(1);
        switch (key) {
            case 'W':
                header_.width = int(parse_positive("W", val, offset_));
                have_w = true;
                break;
            case 'H':
                header_.height = int(parse_positive("H", val, offset_));
                have_h = true;
                break;
            case 'F': {
                size_t colon = val.find(':');
                if (colon == std::string::npos)
                    fail(ErrorKind::Format,
                         strfmt("bad F tag '%s', expected num:den near byte %llu", val.c_str(),
                                (unsigned long long)offset_));
                header_.fps_num = int(parse_positive("F", val.substr(0, colon), offset_));
                header_.fps_den = int(parse_positive("F", val.substr(colon + 1), offset_));
                have_f = true;
                break;
            }
            case 'I':
                if (val != "p")
                    fail(ErrorKind::Unsupported,
                         strfmt("interlaced stream (I%s); only progressive (Ip) is handled",
                                val.c_str()));
                break;
            case 'C':
                colorspace = val;
                break;
            case 'A':
            case 'X':
                break;  // aspect ratio and comments carry no pixel data
            default:
                break;  // unknown tags are ignored, matching common tooling
        }
    }
    if (!have_w || !have_h || !have_f)
        fail(ErrorKind::Format, "stream header lacks one of the W/H/F tags");

    if (colorspace == "420jpeg" || colorspace == "420") {
        header_.format = PixelFormat::Yuv420;
    } else if (colorspace == "mono") {
        header_.format = PixelFormat::Gray8;
    } else {
        fail(ErrorKind::Unsupported,
             strfmt("colorspace C%s is not supported (use C420jpeg, C420 or Cmono)",
                    colorspace.c_str()));
    }
    header_.validate();
}

std::optional<Frame> Y4mReader::next() {
    std::string marker;
    char c;
    if (!in_.get(c)) return std::nullopt;  // clean EOF
    ++offset_;
    while (c != '\n') {
        marker.push_back(c);
        if (marker.size() > kMaxHeaderLine)
            fail(ErrorKind::Format,
                 strfmt("frame %lld marker line exceeds 2048 bytes", (long long)next_index_));
        if (!in_.get(c))
            fail(ErrorKind::Format,
                 strfmt("truncated FRAME marker at frame %lld", (long long)next_index_));
        ++offset_;
    }
    // Marker may carry parameters after the word FRAME; we only need the word.
    if (marker.substr(0, 5) != "FRAME" || (marker.size() > 5 && marker[5] != ' '))
        fail(ErrorKind::Format,
             strfmt("expected FRAME marker at frame %lld near byte %llu", (long long)next_index_,
                    (unsigned long long)offset_));

    Frame frame = Frame::make(header_.width, header_.height, header_.format);
    frame.index = next_index_;
    frame.pts_seconds = header_.frame_time(next_index_);
    for (int p = 0; p < frame.plane_count(); ++p) {
        auto& data = frame.plane[p];
        in_.read(reinterpret_cast<char*>(data.data()), std::streamsize(data.size()));
        size_t got = size_t(in_.gcount());
        offset_ += got;
        if (got != data.size())
            fail(ErrorKind::Format,
                 strfmt("truncated frame payload at frame %lld (plane %d, got %zu of %zu bytes)",
                        (long long)next_index_, p, got, data.size()));
    }
    ++next_index_;
    return frame;
}

Y4mWriter::Y4mWriter(std::ostream& out, ClipHeader header) : out_(out), header_(header) {
    header_.validate();
    const char* colorspace = nullptr;
    switch (header_.format) {
        case PixelFormat::Yuv420: colorspace = "420jpeg"; break;
        case PixelFormat::Gray8: colorspace = "mono"; break;
        case PixelFormat::Rgb24:
            fail(ErrorKind::Unsupported, "rgb24 cannot be written as y4m; convert to yuv420 first");
    }
    std::string line = strfmt("YUV4MPEG2 W%d H%d F%d:%d Ip A1:1 C%s\n", header_.width,
                              header_.height, header_.fps_num, header_.fps_den, colorspace);
    out_.write(line.data(), std::streamsize(line.size()));
    bytes_ += line.size();
    if (!out_) fail(ErrorKind::Io, "failed writing y4m header");
}

void Y4mWriter::write(const Frame& frame) {
    if (frame.width != header_.width || frame.height != header_.height ||
        frame.format != header_.format)
        fail(ErrorKind::Data,
             strfmt("frame %lld is %dx%d %s but the clip header says %dx%d %s",
                    (long long)count_, frame.width, frame.height,
                    pixel_format_name(frame.format), header_.width, header_.height,
                    pixel_format_name(header_.format)));
    if (!frame.layout_ok())
        fail(ErrorKind::Data, strfmt("frame %lld has inconsistent plane sizes", (long long)count_));
    out_.write("FRAME\n", 6);
    bytes_ += 6;
    for (int p = 0; p < frame.plane_count(); ++p) {
        const auto& data = frame.plane[p];
        out_.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
        bytes_ += data.size();
    }
    if (!out_) fail(ErrorKind::Io, strfmt("failed writing frame %lld", (long long)count_));
    ++count_;
}

Clip read_y4m_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, strfmt("cannot open '%s' for reading", path.c_str()));
    Y4mReader reader(in);
    Clip clip;
    clip.header = reader.header();
    while (auto frame = reader.next()) clip.frames.push_back(std::move(*frame));
    clip.header.frame_count = int64_t(clip.frames.size());
    return clip;
}

uint64_t write_y4m_file(const std::string& path, const ClipHeader& header,
                        std::span<const Frame> frames) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, strfmt("cannot open '%s' for writing", path.c_str()));
    Y4mWriter writer(out, header);
    for (const Frame& f : frames) writer.write(f);
    out.flush();
    if (!out) fail(ErrorKind::Io, strfmt("failed writing '%s'", path.c_str()));
    return writer.bytes_written();
}

}  // namespace aimtrace
