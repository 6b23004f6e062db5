// Exception types shared across the toolkit. The CLI maps these onto
// process exit codes: configuration / input problems exit with 1,
// numerical failures with 2.
#pragma once

#include <stdexcept>
#include <string>

namespace mbcc {

// Invalid configuration or operation preconditions (bad grid sizes,
// out-of-range indices, malformed JSON, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Dataset file problems. Each failure mode carries a distinct kind so
// callers (and tests) can tell them apart.
class IoError : public std::runtime_error {
public:
    enum class Kind {
        NotFound,
        ChecksumMismatch,
        TruncatedPayload,
        SizeMismatch,
        BadFormat,
    };

    IoError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Numerical breakdown (failed decomposition, degenerate input that
// slipped past validation, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mbcc
