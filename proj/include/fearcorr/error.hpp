#pragma once

#include <stdexcept>
#include <string>

namespace fearcorr {

// Broad failure classes. Each maps onto one CLI exit code.
enum class ErrorKind {
    Validation,             // bad parameter or configuration
    Data,                   // malformed, inconsistent or unusable input data
    InsufficientStatistics  // valid input, but not enough samples to produce a result
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error validation_error(const std::string& what) {
    return Error(ErrorKind::Validation, what);
}

inline Error data_error(const std::string& what) {
    return Error(ErrorKind::Data, what);
}

inline Error statistics_error(const std::string& what) {
    return Error(ErrorKind::InsufficientStatistics, what);
}

inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::Data: return 3;
    case ErrorKind::InsufficientStatistics: return 4;
    }
    return 1;
}

} // namespace fearcorr
