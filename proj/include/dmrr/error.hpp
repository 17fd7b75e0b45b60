#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dmrr {

/// Malformed input text. `line` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Shapes that violate a documented size contract (n < 2, length mismatch, m > d, ...).
class DimensionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Data for which a kernel bandwidth cannot be defined.
class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values appeared inside an iterative solver.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dmrr
