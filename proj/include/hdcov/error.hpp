#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hdcov {

enum class ErrorCode {
    NotPSD,
    BadDimension,
    InvalidReference,
    BadArgument,
    InsufficientSamples,
    DegenerateStatistic,
    ZeroTrace,
    TooLarge,
    BadIndex,
    Unsupported,
    RatioTooLarge,
    UnknownMoment,
    Io,
    Parse,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

    /// True for failures caused by the caller's input (bad flags, degenerate
    /// configurations, malformed files) as opposed to internal faults.
    bool is_user_error() const noexcept;

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace hdcov
