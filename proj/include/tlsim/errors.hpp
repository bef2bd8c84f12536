#pragma once

#include <stdexcept>
#include <string>

namespace tlsim {

/// Netlist text error; carries the 1-based line number of the offending line.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Singular or numerically singular linear system.
class SingularMatrixError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Iterative eigenvalue computation failed to converge.
class ConvergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tlsim
