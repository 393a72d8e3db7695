#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace enrichfp {

enum class ErrorCode {
    DimensionMismatch,
    NonFiniteResult,
    NoConvergence,
    SchemaError,
    InvariantViolation,
    ParameterOutOfRange,
    SearchBudgetExceeded,
    InsufficientData,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type for every failure raised by the library.
///
/// `path()` is a JSON-pointer-like location ("/base/stages/1/lo") for
/// schema and config failures, and empty otherwise.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string path = {});

    ErrorCode code() const noexcept { return code_; }
    const std::string& path() const noexcept { return path_; }

private:
    ErrorCode code_;
    std::string path_;
};

}  // namespace enrichfp
