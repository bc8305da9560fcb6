#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dirsteer {

enum class ErrorCode {
    kValidation,
    kIo,
    kMissingFile,
    kShapeMismatch,
    kNonFinite,
    kBadFormat,
    kMissingPairing,
    kOutOfRange,
    kDegenerateMatrix,
    kDegenerateMask,
    kSingleClass,
    kInsufficientData,
    kInvalidDirection,
    kEmptyInput,
    kUsage,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Only kIo is an I/O failure; every other code is a validation failure of
// some input (the CLI maps these to exit codes 2 and 1 respectively).
constexpr bool is_io_error(ErrorCode code) noexcept { return code == ErrorCode::kIo; }

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace dirsteer
