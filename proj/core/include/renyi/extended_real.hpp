#pragma once

#include <compare>
#include <limits>
#include <ostream>

namespace renyi {

// Real number or +/- infinity. NaN is rejected at construction.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;
    ExtendedReal(double v);

    static ExtendedReal infinity() { return ExtendedReal(Tag{}, std::numeric_limits<double>::infinity()); }
    static ExtendedReal minus_infinity() { return ExtendedReal(Tag{}, -std::numeric_limits<double>::infinity()); }

    bool is_finite() const { return v_ > -kInf && v_ < kInf; }
    bool is_plus_infinity() const { return v_ == kInf; }
    bool is_minus_infinity() const { return v_ == -kInf; }

    // Throws if the value is infinite.
    double value() const;
    // Infinite values map to +/- the largest double's infinity representation.
    double raw() const { return v_; }

    ExtendedReal operator-() const { return ExtendedReal(Tag{}, -v_); }
    ExtendedReal operator+(double rhs) const;
    ExtendedReal operator-(double rhs) const { return *this + (-rhs); }

    friend auto operator<=>(const ExtendedReal& a, const ExtendedReal& b) { return a.v_ <=> b.v_; }
    friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) { return a.v_ == b.v_; }

    friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& x);

private:
    struct Tag {};
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr ExtendedReal(Tag, double v) : v_(v) {}
    double v_ = 0.0;
};

}  // namespace renyi
