#pragma once

#include <stdexcept>
#include <string>

namespace intermit {

/// Base for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad configuration: thresholds, window sizes, models, spec wiring.
/// The CLI maps these to exit code 1.
struct ConfigError : Error {
    using Error::Error;
};

/// Bad or degenerate input data. The CLI maps these to exit code 2.
struct DataError : Error {
    using Error::Error;
};

struct EmptyWindow : DataError {
    EmptyWindow() : DataError("empty verdict window") {}
};

/// q is undefined for a window with a single verdict (zero transitions).
struct NoTransitions : DataError {
    NoTransitions() : DataError("no transitions: q-score undefined for a single verdict") {}
};

struct WindowTooSmall : ConfigError {
    explicit WindowTooSmall(int w)
        : ConfigError("window size must be at least 2, got " + std::to_string(w)) {}
};

struct InvalidModel : ConfigError {
    using ConfigError::ConfigError;
};

struct NotErgodic : ConfigError {
    using ConfigError::ConfigError;
};

/// A consistent-kind group spec has no intermittent spec with the same
/// window size to evaluate the exclusion rule against.
struct MissingExclusionPartner : ConfigError {
    explicit MissingExclusionPartner(const std::string& label, int window)
        : ConfigError("group '" + label + "' (window " + std::to_string(window) +
                      ") has no intermittent group with the same window size") {}
};

struct ParseError : DataError {
    ParseError(std::size_t line_arg, const std::string& reason_arg)
        : DataError("parse error at line " + std::to_string(line_arg) + ": " + reason_arg),
          line(line_arg),
          reason(reason_arg) {}
    std::size_t line;
    std::string reason;
};

/// Same test case and night seen with two different verdicts.
struct ConflictingVerdict : DataError {
    using DataError::DataError;
};

struct EmptyLog : DataError {
    EmptyLog() : DataError("revision log is empty") {}
};

/// A score series handed to a renderer was not computed from the
/// history it is being rendered with.
struct SeriesMismatch : DataError {
    using DataError::DataError;
};

struct UnknownCategory : ConfigError {
    explicit UnknownCategory(const std::string& category)
        : ConfigError("annotation category not in taxonomy: '" + category + "'") {}
};

}  // namespace intermit
