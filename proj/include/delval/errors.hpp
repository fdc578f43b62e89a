#pragma once

#include <stdexcept>
#include <string>

namespace delval {

// Violation of a method guard (enumeration limits, support-size caps).
// The CLI maps this to exit code 3.
class guard_error : public std::runtime_error {
public:
    explicit guard_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed configuration or input schema. CLI exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace delval
