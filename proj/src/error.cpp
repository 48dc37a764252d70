#include "hdcov/error.hpp"

namespace hdcov {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotPSD: return "NotPSD";
        case ErrorCode::BadDimension: return "BadDimension";
        case ErrorCode::InvalidReference: return "InvalidReference";
        case ErrorCode::BadArgument: return "BadArgument";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::DegenerateStatistic: return "DegenerateStatistic";
        case ErrorCode::ZeroTrace: return "ZeroTrace";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::BadIndex: return "BadIndex";
        case ErrorCode::Unsupported: return "Unsupported";
        case ErrorCode::RatioTooLarge: return "RatioTooLarge";
        case ErrorCode::UnknownMoment: return "UnknownMoment";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

bool Error::is_user_error() const noexcept { return code_ != ErrorCode::Io; }

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace hdcov
