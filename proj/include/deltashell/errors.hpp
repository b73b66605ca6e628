#pragma once
#include <stdexcept>
#include <string>

namespace ds {

// Error taxonomy maps onto CLI exit codes:
//   config_error      -> 2 (bad usage / bad config)
//   numerical_error   -> 3 (singular system, spectral parameter too close, ...)
//   geometry_error    -> 3 (hypothesis violation, degenerate chart, ...)
// Anything else (including failed assertions inside commands) -> 1.

struct config_error : std::runtime_error {
    explicit config_error(const std::string& m) : std::runtime_error(m) {}
};

struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& m) : std::runtime_error(m) {}
};

struct geometry_error : std::runtime_error {
    explicit geometry_error(const std::string& m) : std::runtime_error(m) {}
};

} // namespace ds
