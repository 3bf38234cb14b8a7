#pragma once
#include <stdexcept>
#include <string>

namespace mesormt {

// Bad user-facing inputs (CLI exit code 2).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical machinery failed hard enough to distrust results (CLI exit
// code 3): eigensolver failures above threshold, non-convergent quadrature.
struct NumericalError : std::runtime_error {
    double partial_value; // best value available when failing, else NaN
    explicit NumericalError(const std::string& what, double partial = 0.0 / 0.0)
        : std::runtime_error(what), partial_value(partial) {}
};

} // namespace mesormt
