#pragma once

#include <stdexcept>
#include <string>

namespace coxlab {

enum class ErrorCode {
    INVALID_SCALE,
    INVALID_GRID,
    NONPOSITIVE,
    DEGENERATE_INPUT,
    EMPTY_SET,
    EMPTY_SUPPORT,
    VARIANT_MISMATCH,
    SCALE_MISMATCH,
    RANGE,
    OUT_OF_WINDOW,
    REGIONS_OVERLAP,
    WINDOW_TOO_SMALL,
    BAD_M,
    N_TOO_SMALL,
    NO_SIGN_CHANGE,
    INSUFFICIENT_DATA,
    DIVISION_DEGENERATE,
    BAD_HEADER,
    CONFIG,
    IO,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace coxlab
