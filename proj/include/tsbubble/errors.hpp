#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsbubble {

/// Raised when a model or test specification violates its invariants.
class InvalidSpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an input series is too short for the requested operation.
class LengthError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a statistic cannot be formed (zero variance, singular design,
/// all-zero residuals and similar exact-fit situations).
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace tsbubble
