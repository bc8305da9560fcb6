#include "dirsteer/error.hpp"

namespace dirsteer {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::kValidation: return "validation";
        case ErrorCode::kIo: return "io";
        case ErrorCode::kMissingFile: return "missing-file";
        case ErrorCode::kShapeMismatch: return "shape-mismatch";
        case ErrorCode::kNonFinite: return "non-finite";
        case ErrorCode::kBadFormat: return "bad-format";
        case ErrorCode::kMissingPairing: return "missing-pairing";
        case ErrorCode::kOutOfRange: return "out-of-range";
        case ErrorCode::kDegenerateMatrix: return "degenerate-matrix";
        case ErrorCode::kDegenerateMask: return "degenerate-mask";
        case ErrorCode::kSingleClass: return "single-class";
        case ErrorCode::kInsufficientData: return "insufficient-data";
        case ErrorCode::kInvalidDirection: return "invalid-direction";
        case ErrorCode::kEmptyInput: return "empty-input";
        case ErrorCode::kUsage: return "usage";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace dirsteer
