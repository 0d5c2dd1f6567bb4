#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

namespace brjuno {

/// An exact dyadic rational m * 2^e with an arbitrary-precision mantissa.
///
/// Canonical form: the mantissa is odd or zero, and zero has exponent 0.
/// Addition, subtraction and multiplication are exact; division is not
/// closed over dyadics and lives on Interval with outward rounding.
class Dyadic {
public:
    Dyadic() : mantissa_(0), exponent_(0) {}
    Dyadic(long v) : mantissa_(v), exponent_(0) { normalize(); }
    Dyadic(const mpz_class& mantissa, std::int64_t exponent)
        : mantissa_(mantissa), exponent_(exponent) {
        normalize();
    }

    /// 2^k
    static Dyadic pow2(std::int64_t k) { return Dyadic(mpz_class(1), k); }

    const mpz_class& mantissa() const { return mantissa_; }
    std::int64_t exponent() const { return exponent_; }

    bool is_zero() const { return mantissa_ == 0; }
    int sign() const { return sgn(mantissa_); }

    Dyadic operator-() const { return Dyadic(-mantissa_, exponent_); }
    Dyadic operator+(const Dyadic& o) const;
    Dyadic operator-(const Dyadic& o) const { return *this + (-o); }
    Dyadic operator*(const Dyadic& o) const {
        return Dyadic(mantissa_ * o.mantissa_, exponent_ + o.exponent_);
    }

    Dyadic mul_pow2(std::int64_t k) const {
        if (is_zero()) return Dyadic();
        return Dyadic(mantissa_, exponent_ + k);
    }

    /// Comparison via exact alignment.
    int compare(const Dyadic& o) const;
    bool operator==(const Dyadic& o) const { return compare(o) == 0; }
    bool operator!=(const Dyadic& o) const { return compare(o) != 0; }
    bool operator<(const Dyadic& o) const { return compare(o) < 0; }
    bool operator<=(const Dyadic& o) const { return compare(o) <= 0; }
    bool operator>(const Dyadic& o) const { return compare(o) > 0; }
    bool operator>=(const Dyadic& o) const { return compare(o) >= 0; }

    /// Largest multiple of 2^-prec that is <= *this.
    Dyadic floor_to(std::int64_t prec) const { return round_to(prec, /*up=*/false); }
    /// Smallest multiple of 2^-prec that is >= *this.
    Dyadic ceil_to(std::int64_t prec) const { return round_to(prec, /*up=*/true); }

    Dyadic abs() const { return sign() < 0 ? -*this : *this; }

    /// floor(value) as an integer.
    mpz_class floor() const;

    /// Exact textual form "m*2^e".
    std::string to_string() const;
    /// Decimal rendering with `digits` fractional digits, rounded toward
    /// -infinity (deterministic; used for CSV/text output).
    std::string to_decimal(int digits) const;
    double to_double() const;

    /// Parses "m*2^e", an integer, or an exactly-dyadic decimal like "1.75".
    /// Throws ParseError otherwise (0.1 is not a dyadic).
    static Dyadic parse(const std::string& text);

private:
    void normalize();
    Dyadic round_to(std::int64_t prec, bool up) const;

    mpz_class mantissa_;
    std::int64_t exponent_;
};

}  // namespace brjuno
