#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace strokegen {

// All recoverable failures carry a machine-readable category so the CLI can
// report them uniformly. Categories in use: "shape", "index", "format",
// "domain", "state", "config", "io".
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const { return category_; }

private:
    std::string category_;
};

[[noreturn]] inline void fail(const std::string& category, const std::string& message) {
    throw Error(category, message);
}

}  // namespace strokegen
