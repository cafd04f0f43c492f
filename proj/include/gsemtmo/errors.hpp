#pragma once

#include <stdexcept>
#include <string>

namespace gsemtmo {

// Bad inputs (shape mismatches, unreadable files, violated preconditions).
// The CLI maps these to exit code 1; everything else exits 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gsemtmo
