#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lprisk {

// Exact base-10 number: mantissa * 10^-scale. Ledger identities are algebraic
// and must hold bit-exactly, so amounts and prices never pass through binary
// floating point. Division is deliberately absent; ratios are computed in
// double at the reporting boundary.
class Decimal {
public:
    using Mantissa = boost::multiprecision::cpp_int;

    Decimal() = default;
    explicit Decimal(long long units) : mant_(units) {}

    static Decimal from_parts(Mantissa mantissa, std::int32_t scale);

    // Plain decimal literals with optional sign, fraction and exponent.
    // Returns nullopt on anything else (no inf/nan/hex).
    static std::optional<Decimal> parse(std::string_view text);

    Decimal operator-() const;
    Decimal operator+(const Decimal& rhs) const;
    Decimal operator-(const Decimal& rhs) const;
    Decimal operator*(const Decimal& rhs) const;
    Decimal& operator+=(const Decimal& rhs) { return *this = *this + rhs; }
    Decimal& operator-=(const Decimal& rhs) { return *this = *this - rhs; }

    bool operator==(const Decimal& rhs) const;
    std::strong_ordering operator<=>(const Decimal& rhs) const;

    bool is_zero() const { return mant_.is_zero(); }
    bool is_negative() const { return mant_ < 0; }
    bool is_positive() const { return mant_ > 0; }

    // Digits in the mantissa, ignoring sign and trailing-zero normalization.
    int significant_digits() const;

    std::string str() const;
    double to_double() const;

private:
    Mantissa mant_ = 0;
    std::int32_t scale_ = 0;  // digits after the decimal point, >= 0

    void normalize();
};

}  // namespace lprisk
