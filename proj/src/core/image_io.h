#pragma once

#include <string>

#include "frame.h"

namespace aimtrace {

// Loads a single still image as Gray8 or Rgb24. PNG (8-bit gray/RGB, with
// palette/alpha/16-bit inputs normalized) plus binary PGM/PPM.
Frame load_image(const std::string& path);

// Format picked from the extension: .png, .pgm (Gray8 only), .ppm (Rgb24 only).
void save_image(const Frame& frame, const std::string& path);

// Reads dir/<pattern % index> for index = 0,1,2,... until the first missing
// file. `pattern` holds one %d-style placeholder, e.g. "frame_%06d.png".
// Timing comes from dir/frames.json: {"fps": <number>, "start_time": <s>}.
// A file matching the pattern beyond the first gap raises Error(Data)
// naming the missing index.
Clip read_image_sequence(const std::string& dir, const std::string& pattern = "frame_%06d.png");

void write_image_sequence(const Clip& clip, const std::string& dir,
                          const std::string& pattern = "frame_%06d.png");

}  // namespace aimtrace
