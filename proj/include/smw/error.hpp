#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smw {

enum class ErrorCode {
    OutOfRangeEndpoint,
    NegativeOrNonFiniteWeight,
    LabelOutOfRange,
    MutexViolation,
    LabelConflict,
    AlreadyConnected,
    TooManyLabels,
    TooLargeForOracle,
    InconsistentTransform,
    ShapeMismatch,
    BadThreshold,
    OverlappingClassSets,
    ParseError,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::OutOfRangeEndpoint: return "OutOfRangeEndpoint";
    case ErrorCode::NegativeOrNonFiniteWeight: return "NegativeOrNonFiniteWeight";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::MutexViolation: return "MutexViolation";
    case ErrorCode::LabelConflict: return "LabelConflict";
    case ErrorCode::AlreadyConnected: return "AlreadyConnected";
    case ErrorCode::TooManyLabels: return "TooManyLabels";
    case ErrorCode::TooLargeForOracle: return "TooLargeForOracle";
    case ErrorCode::InconsistentTransform: return "InconsistentTransform";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BadThreshold: return "BadThreshold";
    case ErrorCode::OverlappingClassSets: return "OverlappingClassSets";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failure with the offending 1-based line number (0 when not line-oriented).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace smw
