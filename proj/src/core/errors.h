// Error taxonomy for the library.  Three categories so the C wrapper and the
// command-line tool can map failures onto distinct status codes: bad input,
// numerical breakdown, and filesystem trouble.
#pragma once

#include <stdexcept>
#include <string>

namespace fluxmol {

struct invalid_input : std::runtime_error {
    explicit invalid_input(const std::string& what) : std::runtime_error(what) {}
};

struct numeric_failure : std::runtime_error {
    explicit numeric_failure(const std::string& what) : std::runtime_error(what) {}
};

struct io_failure : std::runtime_error {
    explicit io_failure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fluxmol
