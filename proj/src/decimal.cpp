#include "lprisk/decimal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace lprisk {

namespace {

const Decimal::Mantissa kTen = 10;

Decimal::Mantissa pow10(std::int32_t n) {
    Decimal::Mantissa r = 1;
    for (std::int32_t i = 0; i < n; ++i) r *= kTen;
    return r;
}

}  // namespace

void Decimal::normalize() {
    if (mant_.is_zero()) {
        scale_ = 0;
        return;
    }
    while (scale_ > 0 && mant_ % kTen == 0) {
        mant_ /= kTen;
        --scale_;
    }
}

Decimal Decimal::from_parts(Mantissa mantissa, std::int32_t scale) {
    Decimal d;
    d.mant_ = std::move(mantissa);
    d.scale_ = scale;
    if (scale < 0) {
        d.mant_ *= pow10(-scale);
        d.scale_ = 0;
    }
    d.normalize();
    return d;
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
    std::size_t i = 0;
    const std::size_t n = text.size();
    bool negative = false;
    if (i < n && (text[i] == '+' || text[i] == '-')) {
        negative = text[i] == '-';
        ++i;
    }

    Mantissa mant = 0;
    std::int64_t frac_digits = 0;
    bool any_digit = false;
    for (; i < n && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
        mant = mant * 10 + (text[i] - '0');
        any_digit = true;
    }
    if (i < n && text[i] == '.') {
        ++i;
        bool any_frac = false;
        for (; i < n && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
            mant = mant * 10 + (text[i] - '0');
            ++frac_digits;
            any_frac = true;
        }
        if (!any_frac) return std::nullopt;
    }
    if (!any_digit) return std::nullopt;

    std::int64_t exponent = 0;
    if (i < n && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool exp_neg = false;
        if (i < n && (text[i] == '+' || text[i] == '-')) {
            exp_neg = text[i] == '-';
            ++i;
        }
        if (i == n) return std::nullopt;
        std::int64_t e = 0;
        for (; i < n && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
            e = e * 10 + (text[i] - '0');
            if (e > 100000) return std::nullopt;
        }
        exponent = exp_neg ? -e : e;
    }
    if (i != n) return std::nullopt;

    if (negative) mant = -mant;
    const std::int64_t scale = frac_digits - exponent;
    if (scale > INT32_MAX || scale < INT32_MIN) return std::nullopt;
    return from_parts(std::move(mant), static_cast<std::int32_t>(scale));
}

Decimal Decimal::operator-() const {
    Decimal r = *this;
    r.mant_ = -r.mant_;
    return r;
}

Decimal Decimal::operator+(const Decimal& rhs) const {
    Decimal r;
    if (scale_ == rhs.scale_) {
        r.mant_ = mant_ + rhs.mant_;
        r.scale_ = scale_;
    } else if (scale_ > rhs.scale_) {
        r.mant_ = mant_ + rhs.mant_ * pow10(scale_ - rhs.scale_);
        r.scale_ = scale_;
    } else {
        r.mant_ = mant_ * pow10(rhs.scale_ - scale_) + rhs.mant_;
        r.scale_ = rhs.scale_;
    }
    r.normalize();
    return r;
}

Decimal Decimal::operator-(const Decimal& rhs) const { return *this + (-rhs); }

Decimal Decimal::operator*(const Decimal& rhs) const {
    Decimal r;
    r.mant_ = mant_ * rhs.mant_;
    r.scale_ = scale_ + rhs.scale_;
    r.normalize();
    return r;
}

bool Decimal::operator==(const Decimal& rhs) const {
    return scale_ == rhs.scale_ && mant_ == rhs.mant_;
}

std::strong_ordering Decimal::operator<=>(const Decimal& rhs) const {
    Mantissa lhs_m = mant_;
    Mantissa rhs_m = rhs.mant_;
    if (scale_ > rhs.scale_) {
        rhs_m *= pow10(scale_ - rhs.scale_);
    } else if (rhs.scale_ > scale_) {
        lhs_m *= pow10(rhs.scale_ - scale_);
    }
    if (lhs_m < rhs_m) return std::strong_ordering::less;
    if (lhs_m > rhs_m) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

int Decimal::significant_digits() const {
    if (mant_.is_zero()) return 1;
    Mantissa m = mant_ < 0 ? Mantissa(-mant_) : mant_;
    int digits = 0;
    while (m > 0) {
        m /= kTen;
        ++digits;
    }
    return digits;
}

std::string Decimal::str() const {
    Mantissa m = mant_ < 0 ? Mantissa(-mant_) : mant_;
    std::string digits = m.str();
    if (static_cast<std::int32_t>(digits.size()) <= scale_) {
        digits.insert(0, scale_ - digits.size() + 1, '0');
    }
    std::string out;
    if (mant_ < 0) out += '-';
    out.append(digits, 0, digits.size() - scale_);
    if (scale_ > 0) {
        out += '.';
        out.append(digits, digits.size() - scale_, scale_);
    }
    return out;
}

double Decimal::to_double() const {
    double m = mant_.convert_to<double>();
    if (scale_ == 0) return m;
    return m / std::pow(10.0, static_cast<double>(scale_));
}

}  // namespace lprisk
