#pragma once

#include <stdexcept>
#include <string>

namespace nucleo {

// Bad user input: malformed files, dimension mismatches, violated
// preconditions. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures during an otherwise valid run (I/O errors, capacity limits).
// The CLI maps this to exit code 1.
class PipelineError : public std::runtime_error {
public:
    explicit PipelineError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace nucleo
