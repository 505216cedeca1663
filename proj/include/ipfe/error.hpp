#pragma once

#include <stdexcept>
#include <string>

namespace ipfe {

enum class ErrorKind {
    Domain,
    NoConvergence,
    AstableConfiguration,
    NoTransition,
    InvalidParamValue,
    Unreachable,
    ZeroBaseContrast,
    ResampleExhausted,
    NoSuccessfulRows,
    InvalidConfig,
};

const char* to_string(ErrorKind kind);

/// Runtime failure raised by the simulation and analysis layers.
class SimError : public std::runtime_error {
public:
    SimError(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace ipfe
