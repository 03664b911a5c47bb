#pragma once

#include <stdexcept>
#include <string>

namespace gldp {

enum class ErrorKind {
    invalid_argument,  // bad input or configuration
    numerical,         // CFL violation, blow-up, failed inversion
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_argument(const std::string& what) {
    throw Error(ErrorKind::invalid_argument, what);
}

[[noreturn]] inline void fail_numerical(const std::string& what) {
    throw Error(ErrorKind::numerical, what);
}

}  // namespace gldp
