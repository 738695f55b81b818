#pragma once

#include <stdexcept>
#include <string>

namespace renyi {

enum class ErrorCode {
    NotHermitian,
    NotPSD,
    BadIndex,
    DimMismatch,
    BadShape,
    BadPartition,
    BNotClassical,
    NoConvergence,
    AllZero,
    AlphabetMismatch,
    BadEpsilon,
    BadAlpha,
    TargetOutOfRange,
    SupportViolation,
    Infeasible,
    BadProbability,
    EmptyEvent,
    BadInput,
};

const char* error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace renyi
