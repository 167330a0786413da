#include "coxlab/error.hpp"

namespace coxlab {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::INVALID_SCALE: return "INVALID_SCALE";
        case ErrorCode::INVALID_GRID: return "INVALID_GRID";
        case ErrorCode::NONPOSITIVE: return "NONPOSITIVE";
        case ErrorCode::DEGENERATE_INPUT: return "DEGENERATE_INPUT";
        case ErrorCode::EMPTY_SET: return "EMPTY_SET";
        case ErrorCode::EMPTY_SUPPORT: return "EMPTY_SUPPORT";
        case ErrorCode::VARIANT_MISMATCH: return "VARIANT_MISMATCH";
        case ErrorCode::SCALE_MISMATCH: return "SCALE_MISMATCH";
        case ErrorCode::RANGE: return "RANGE";
        case ErrorCode::OUT_OF_WINDOW: return "OUT_OF_WINDOW";
        case ErrorCode::REGIONS_OVERLAP: return "REGIONS_OVERLAP";
        case ErrorCode::WINDOW_TOO_SMALL: return "WINDOW_TOO_SMALL";
        case ErrorCode::BAD_M: return "BAD_M";
        case ErrorCode::N_TOO_SMALL: return "N_TOO_SMALL";
        case ErrorCode::NO_SIGN_CHANGE: return "NO_SIGN_CHANGE";
        case ErrorCode::INSUFFICIENT_DATA: return "INSUFFICIENT_DATA";
        case ErrorCode::DIVISION_DEGENERATE: return "DIVISION_DEGENERATE";
        case ErrorCode::BAD_HEADER: return "BAD_HEADER";
        case ErrorCode::CONFIG: return "CONFIG";
        case ErrorCode::IO: return "IO";
    }
    return "UNKNOWN";
}

}  // namespace coxlab
