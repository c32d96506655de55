#pragma once

#include <stdexcept>
#include <string>

namespace nbm {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
    Internal = 1,
    Input = 2,
    Solver = 3,
    Infeasible = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Malformed files, invalid configs, bad arguments.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

/// Linear solver failed to reach the requested tolerance.
class SolverError : public Error {
public:
    explicit SolverError(const std::string& what) : Error(ErrorKind::Solver, what) {}
};

/// An observation cannot be evaluated on the current mesh (e.g. a ball with no centroids).
class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& what) : Error(ErrorKind::Infeasible, what) {}
};

}  // namespace nbm
