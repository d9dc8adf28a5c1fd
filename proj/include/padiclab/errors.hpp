#pragma once

#include <stdexcept>
#include <string>

namespace padiclab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or degenerate input to a library operation.
struct DomainError : Error {
    using Error::Error;
};

/// Cycle detected while deriving the dependency order.
struct CycleError : Error {
    using Error::Error;
};

/// An exact denominator evaluated to zero; carries the offending node id.
struct DivisionByZeroError : Error {
    std::string node;
    DivisionByZeroError(std::string node_, const std::string& msg)
        : Error(msg), node(std::move(node_)) {}
};

/// Floating emulation cannot continue (division by exact zero or by a
/// value whose digits are all undetermined).
struct PrecisionFailure : Error {
    using Error::Error;
};

/// Fixed-point residue arithmetic cannot represent the requested step.
struct FixedPointError : Error {
    using Error::Error;
};

struct ParseError : Error {
    int line, column;
    ParseError(int line_, int column_, const std::string& msg)
        : Error("line " + std::to_string(line_) + ", col " +
                std::to_string(column_) + ": " + msg),
          line(line_), column(column_) {}
};

}  // namespace padiclab
