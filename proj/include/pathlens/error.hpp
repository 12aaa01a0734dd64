#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pathlens {

// All library failures carry a stable machine-readable code alongside the
// human-readable message. Tests and the CLI dispatch on code(), never on
// message text.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
    throw Error(std::move(code), message);
}

}  // namespace pathlens
