#pragma once

#include <stdexcept>
#include <string>

namespace ssd {

// Error categories map onto process exit codes (validation/parse -> 2,
// degenerate -> 3) and onto the C API status codes.
enum class ErrorKind {
    validation,
    parse,
    degenerate,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

    int exit_code() const {
        return kind_ == ErrorKind::degenerate ? 3 : 2;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_validation(const std::string& msg) {
    throw Error(ErrorKind::validation, msg);
}
[[noreturn]] inline void throw_parse(const std::string& msg) {
    throw Error(ErrorKind::parse, msg);
}
[[noreturn]] inline void throw_degenerate(const std::string& msg) {
    throw Error(ErrorKind::degenerate, msg);
}

}  // namespace ssd
