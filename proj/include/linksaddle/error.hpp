#pragma once

#include <stdexcept>
#include <string>

namespace linksaddle {

enum class ErrorKind {
    InvalidSpec,
    Shape,
    SolverFailure,
    Overflow,
    Domain,
    Geometry,
    Intersection,
    DegenerateRoot,
    BoundaryZero,
    Config,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind lets
/// callers (the CLI in particular) map failures onto exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace linksaddle
