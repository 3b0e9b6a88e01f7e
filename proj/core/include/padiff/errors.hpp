#pragma once

#include <stdexcept>
#include <string>

namespace padiff {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A mathematical precondition of an operation does not hold (bad input,
// non-unit where a unit is required, radii not separated, ...).
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& msg) : Error(msg) {}
};

// The represented exponent window or the scalar precision is insufficient
// to certify the result. Retry with a larger window / higher precision.
struct WindowError : Error {
    explicit WindowError(const std::string& msg) : Error(msg) {}
};

} // namespace padiff
