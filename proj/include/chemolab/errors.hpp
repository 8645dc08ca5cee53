#pragma once

#include <stdexcept>
#include <string>

namespace chemolab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value violates a documented invariant (bad parameters, bad config).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed input text. Carries the offending line (0 when unknown) and field.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::string field)
        : Error(what), line_(line), field_(std::move(field)) {}
    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

/// The discrete solution stopped being finite.
class NonFiniteError : public Error {
public:
    NonFiniteError(const std::string& what, double t) : Error(what), t_(t) {}
    double time() const noexcept { return t_; }

private:
    double t_;
};

/// No Lyapunov weights exist for the requested parameters.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// A quadratic form expected to be negative definite is not.
class NonPositiveGapError : public Error {
public:
    using Error::Error;
};

/// Two trajectories cannot be compared snapshot by snapshot.
class MismatchedRunsError : public Error {
public:
    using Error::Error;
};

}  // namespace chemolab
