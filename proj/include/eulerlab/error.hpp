#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eulerlab {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the set on which an operation is defined
/// (time beyond the horizon, log of a negative number, empty step set).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Partition index outside the configured range.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration; maps to CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A target grid point is missing from the noise plan's fine grid.
class RefinementError : public Error {
public:
    using Error::Error;
};

/// Not enough Monte Carlo samples to resolve the requested statistic.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// File system failures; maps to CLI exit code 3.
class IoError : public Error {
public:
    using Error::Error;
};

/// Lexical or syntactic error in a coefficient expression.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluation produced NaN or hit a domain violation; carries the printed
/// subexpression that produced it.
class EvalError : public Error {
public:
    EvalError(const std::string& what, std::string subexpr)
        : Error(what + " in '" + subexpr + "'"), subexpr_(std::move(subexpr)) {}

    const std::string& subexpression() const noexcept { return subexpr_; }

private:
    std::string subexpr_;
};

}  // namespace eulerlab
