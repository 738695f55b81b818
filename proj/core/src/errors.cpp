#include "renyi/errors.hpp"

#include <cmath>

#include "renyi/extended_real.hpp"

namespace renyi {

const char* error_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::NotPSD: return "NotPSD";
        case ErrorCode::BadIndex: return "BadIndex";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::BadShape: return "BadShape";
        case ErrorCode::BadPartition: return "BadPartition";
        case ErrorCode::BNotClassical: return "BNotClassical";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::AllZero: return "AllZero";
        case ErrorCode::AlphabetMismatch: return "AlphabetMismatch";
        case ErrorCode::BadEpsilon: return "BadEpsilon";
        case ErrorCode::BadAlpha: return "BadAlpha";
        case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
        case ErrorCode::SupportViolation: return "SupportViolation";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::BadProbability: return "BadProbability";
        case ErrorCode::EmptyEvent: return "EmptyEvent";
        case ErrorCode::BadInput: return "BadInput";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

ExtendedReal::ExtendedReal(double v) : v_(v) {
    require(!std::isnan(v), ErrorCode::BadInput, "NaN is not an extended real");
}

double ExtendedReal::value() const {
    require(is_finite(), ErrorCode::BadInput, "infinite extended real has no finite value");
    return v_;
}

ExtendedReal ExtendedReal::operator+(double rhs) const {
    require(!std::isnan(rhs), ErrorCode::BadInput, "NaN added to extended real");
    if (!is_finite()) return *this;
    return ExtendedReal(v_ + rhs);
}

std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
    if (x.is_plus_infinity()) return os << "+inf";
    if (x.is_minus_infinity()) return os << "-inf";
    return os << x.v_;
}

}  // namespace renyi
