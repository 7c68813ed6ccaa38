#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vidmeta {

enum class ErrorCode {
    kTruncatedHeader,
    kTruncatedBox,
    kNotIsoBmff,
    kMalformedIlstEntry,
    kXmlNotWellFormed,
    kMalformedMetadataString,
    kNonNumericContinuousValue,
    kDegenerateAffinity,
    kDegenerateLabels,
    kDimensionMismatch,
    kEmptyModel,
    kUnknownLabel,
    kEmptyCorpus,
    kClassTooSmall,
    kClassMissing,
    kUnknownDeviceId,
    kInvalidArgument,
    kIo,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Every failure caused by the input data (as opposed to a bug) is reported
// through this type. The CLI maps it to exit status 2.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message)
        , code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// A recovered anomaly. `length` is non-zero when the warning covers a span
// of bytes that was excluded from the tree.
struct Warning {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
    std::string message;
};

}  // namespace vidmeta
