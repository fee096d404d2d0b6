#pragma once

#include <stdexcept>
#include <string>

namespace ftfi {

// Error categories map one-to-one onto the CLI exit codes (2, 3, 4).

/// Malformed input text: edge lists, OFF files, f specifications, JSON.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Overflow, poles, non-finite values or non-convergence.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ftfi
