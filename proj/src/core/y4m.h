#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "frame.h"

namespace aimtrace {

// Streaming YUV4MPEG2 parser. Header is parsed on construction; frames are
// pulled one at a time so arbitrarily long clips never live in memory.
//
// Accepted colorspaces: C420jpeg and C420 (both mapped to Yuv420) and Cmono
// (Gray8). Only progressive material (Ip, or no I tag) is handled.
class Y4mReader {
public:
    explicit Y4mReader(std::istream& in);

    const ClipHeader& header() const { return header_; }

    // Next frame, or nullopt at clean end of stream. Throws Error(Format)
    // on a malformed FRAME marker and on truncated payloads.
    std::optional<Frame> next();

private:
    std::istream& in_;
    ClipHeader header_;
    int64_t next_index_ = 0;
    uint64_t offset_ = 0;  // bytes consumed, for error messages
};

class Y4mWriter {
public:
    Y4mWriter(std::ostream& out, ClipHeader header);

    void write(const Frame& frame);
    uint64_t bytes_written() const { return bytes_; }
    int64_t frames_written() const { return count_; }

private:
    std::ostream& out_;
    ClipHeader header_;
    uint64_t bytes_ = 0;
    int64_t count_ = 0;
};

Clip read_y4m_file(const std::string& path);
uint64_t write_y4m_file(const std::string& path, const ClipHeader& header,
                        std::span<const Frame> frames);

}  // namespace aimtrace
