#include "enrichfp/error.hpp"

namespace enrichfp {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteResult: return "NonFiniteResult";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::SearchBudgetExceeded: return "SearchBudgetExceeded";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, const std::string& path)
{
    std::string out{to_string(code)};
    out += ": ";
    out += message;
    if (!path.empty()) {
        out += " (at ";
        out += path;
        out += ")";
    }
    return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string path)
    : std::runtime_error(compose(code, message, path)), code_(code), path_(std::move(path))
{}

}  // namespace enrichfp
