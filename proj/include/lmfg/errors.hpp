#pragma once

#include <stdexcept>
#include <string>

namespace lmfg {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a function (negative pay-off,
/// fraction outside [0,1], step larger than the stability limit, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Two profiles or fields that must share a grid do not.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// NaN, overshoot beyond tolerance, or another instability signal.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularSystem : public NumericalError {
public:
    using NumericalError::NumericalError;
};

enum class FrontErrorCode {
    not_bracketed_left,   // profile stays below the level: crossing lies left of the grid
    not_bracketed_right,  // profile stays above the level: crossing lies right of the grid
    degenerate,           // no unique crossing (level touched by a boundary value or a plateau)
    non_monotone,
};

class FrontError : public Error {
public:
    FrontError(FrontErrorCode code, const std::string& what) : Error(what), code_(code) {}
    FrontErrorCode code() const noexcept { return code_; }

private:
    FrontErrorCode code_;
};

/// Invalid configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, int line, const std::string& what)
        : Error(format(field, line, what)), field_(field), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& field, int line, const std::string& what) {
        std::string out = "config";
        if (line > 0) out += ":" + std::to_string(line);
        if (!field.empty()) out += " [" + field + "]";
        return out + ": " + what;
    }

    std::string field_;
    int line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class VersionMismatch : public IoError {
public:
    using IoError::IoError;
};

}  // namespace lmfg
