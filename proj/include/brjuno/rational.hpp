#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

#include "brjuno/dyadic.hpp"

namespace brjuno {

/// Exact rational with positive denominator in lowest terms.
/// Used for branch endpoints, structural constants and exponents.
class Rational {
public:
    Rational() : q_(0) {}
    Rational(long v) : q_(v) {}
    Rational(long num, long den) : q_(num, den) { q_.canonicalize(); }
    explicit Rational(const mpq_class& q) : q_(q) { q_.canonicalize(); }
    explicit Rational(const mpz_class& z) : q_(z) {}
    explicit Rational(const Dyadic& d);

    /// Parses "p/q", "p", or an exact decimal.
    static Rational parse(const std::string& text);

    const mpq_class& value() const { return q_; }
    mpz_class numerator() const { return q_.get_num(); }
    mpz_class denominator() const { return q_.get_den(); }

    bool is_zero() const { return q_ == 0; }
    int sign() const { return sgn(q_); }
    bool is_integer() const { return q_.get_den() == 1; }

    Rational operator-() const { return Rational(mpq_class(-q_)); }
    Rational operator+(const Rational& o) const { return Rational(mpq_class(q_ + o.q_)); }
    Rational operator-(const Rational& o) const { return Rational(mpq_class(q_ - o.q_)); }
    Rational operator*(const Rational& o) const { return Rational(mpq_class(q_ * o.q_)); }
    Rational operator/(const Rational& o) const;

    bool operator==(const Rational& o) const { return q_ == o.q_; }
    bool operator!=(const Rational& o) const { return q_ != o.q_; }
    bool operator<(const Rational& o) const { return q_ < o.q_; }
    bool operator<=(const Rational& o) const { return q_ <= o.q_; }
    bool operator>(const Rational& o) const { return q_ > o.q_; }
    bool operator>=(const Rational& o) const { return q_ >= o.q_; }

    /// Largest multiple of 2^-prec that is <= the value.
    Dyadic floor_to(std::int64_t prec) const;
    /// Smallest multiple of 2^-prec that is >= the value.
    Dyadic ceil_to(std::int64_t prec) const;

    std::string to_string() const { return q_.get_str(); }
    double to_double() const { return q_.get_d(); }

private:
    mpq_class q_;
};

}  // namespace brjuno
