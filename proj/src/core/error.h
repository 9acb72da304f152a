#pragma once

#include <stdexcept>
#include <string>

namespace aimtrace {

// Error categories. Everything except Internal means the caller handed us
// something we could diagnose (bad file, bad config, bad data); Internal is
// reserved for conditions that indicate a bug on our side.
enum class ErrorKind {
    Io,           // file could not be opened / read / written
    Format,       // container or file contents are malformed
    Data,         // values are readable but semantically invalid
    Config,       // configuration value out of contract
    Geometry,     // geometric request cannot be satisfied
    Unsupported,  // recognized input we deliberately do not handle
    Internal,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace aimtrace
