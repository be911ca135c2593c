#pragma once

#include <stdexcept>
#include <string>

namespace gmclab {

// Raised when inputs violate a documented precondition. The CLI maps it to exit code 2.
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a numerical step cannot be completed (e.g. factorization failure).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gmclab
