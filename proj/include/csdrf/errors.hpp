// Exception types shared by all csdrf modules.
#pragma once

#include <stdexcept>
#include <string>

namespace csdrf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (nonpositive period, empty grid, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An infinite spectral series could not be truncated below the requested tail bound.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, double achieved_bound)
        : Error(what), achieved_bound_(achieved_bound) {}
    double achieved_bound() const noexcept { return achieved_bound_; }

private:
    double achieved_bound_;
};

/// Eigensolver failure, PSD violation, divergent integral or a root finder that
/// could not meet its tolerance.
class NumericError : public Error {
public:
    using Error::Error;
};

/// The requested rate needs a water level below the representable range.
class RateUnreachable : public NumericError {
public:
    using NumericError::NumericError;
};

/// Scenario configuration could not be parsed; key() names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace csdrf
