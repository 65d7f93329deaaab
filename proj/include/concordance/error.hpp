#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace concordance {

enum class ErrorCode {
    OutOfRange,
    InvalidBits,
    InvalidLabel,
    InvalidSignature,
    InvalidWeights,
    InvalidMatrix,
    DimensionTooLarge,
    NotAttainable,
    Infeasible,
    EmptyTargets,
    NumericalFailure,
    DegenerateMargin,
    TiesPresent,
    TooFewRows,
    MalformedCsv,
    NonPositivePrice,
    RaggedRows,
    ThetaOutOfRange,
    Cancelled,
    MalformedInput,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::InvalidBits: return "InvalidBits";
        case ErrorCode::InvalidLabel: return "InvalidLabel";
        case ErrorCode::InvalidSignature: return "InvalidSignature";
        case ErrorCode::InvalidWeights: return "InvalidWeights";
        case ErrorCode::InvalidMatrix: return "InvalidMatrix";
        case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
        case ErrorCode::NotAttainable: return "NotAttainable";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::EmptyTargets: return "EmptyTargets";
        case ErrorCode::NumericalFailure: return "NumericalFailure";
        case ErrorCode::DegenerateMargin: return "DegenerateMargin";
        case ErrorCode::TiesPresent: return "TiesPresent";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::MalformedCsv: return "MalformedCsv";
        case ErrorCode::NonPositivePrice: return "NonPositivePrice";
        case ErrorCode::RaggedRows: return "RaggedRows";
        case ErrorCode::ThetaOutOfRange: return "ThetaOutOfRange";
        case ErrorCode::Cancelled: return "Cancelled";
        case ErrorCode::MalformedInput: return "MalformedInput";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string detail = {})
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace concordance
