#pragma once

#include <stdexcept>
#include <string>

namespace quxai {

// Error categories map 1:1 onto CLI exit codes and C API status values:
// invalid_argument -> 1, data -> 2, compute -> 3.
enum class ErrorKind {
    invalid_argument = 1,
    data = 2,
    compute = 3,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) {
    throw Error(ErrorKind::invalid_argument, msg);
}
[[noreturn]] inline void fail_data(const std::string& msg) {
    throw Error(ErrorKind::data, msg);
}
[[noreturn]] inline void fail_compute(const std::string& msg) {
    throw Error(ErrorKind::compute, msg);
}

} // namespace quxai
