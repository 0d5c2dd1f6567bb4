#pragma once

#include <cstdint>
#include <string>

#include "brjuno/dyadic.hpp"
#include "brjuno/rational.hpp"

namespace brjuno {

/// Closed interval with exact dyadic endpoints.
///
/// Containment contract: every operation returns an interval containing the
/// exact image of all points of its inputs. Algebraic operations (+, -, *)
/// are exact; division and transcendental operations take an explicit
/// precision (fractional bits) and round outward onto that grid. No
/// floating-point rounding modes are involved; all rounding is integer
/// arithmetic on mantissas.
class Interval {
public:
    Interval() : lo_(), hi_() {}
    explicit Interval(const Dyadic& point) : lo_(point), hi_(point) {}
    Interval(Dyadic lo, Dyadic hi);

    /// Outward enclosure of a rational on the 2^-prec grid.
    static Interval of_rational(const Rational& q, std::int64_t prec);
    static Interval hull(const Interval& a, const Interval& b);

    const Dyadic& lo() const { return lo_; }
    const Dyadic& hi() const { return hi_; }
    Dyadic width() const { return hi_ - lo_; }
    Dyadic mid() const;

    bool is_point() const { return lo_ == hi_; }
    bool contains(const Dyadic& x) const { return lo_ <= x && x <= hi_; }
    bool contains(const Rational& x) const;
    bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
    bool overlaps(const Interval& o) const { return lo_ <= o.hi_ && o.lo_ <= hi_; }
    bool strictly_positive() const { return lo_.sign() > 0; }
    bool strictly_negative() const { return hi_.sign() < 0; }
    bool contains_zero() const { return lo_.sign() <= 0 && hi_.sign() >= 0; }

    /// Intersection; throws DomainError when the intervals are disjoint.
    Interval intersect(const Interval& o) const;

    Interval operator-() const { return Interval(-hi_, -lo_); }
    Interval operator+(const Interval& o) const { return Interval(lo_ + o.lo_, hi_ + o.hi_); }
    Interval operator-(const Interval& o) const { return *this + (-o); }
    Interval operator*(const Interval& o) const;

    /// Outward rounding of both endpoints onto the 2^-prec grid.
    Interval round_out(std::int64_t prec) const {
        return Interval(lo_.floor_to(prec), hi_.ceil_to(prec));
    }

    std::string to_string() const { return "[" + lo_.to_string() + "," + hi_.to_string() + "]"; }

private:
    Dyadic lo_, hi_;
};

/// result ⊇ {x + y : x ∈ a, y ∈ b}, exact.
inline Interval iv_add(const Interval& a, const Interval& b) { return a + b; }
inline Interval iv_sub(const Interval& a, const Interval& b) { return a - b; }
/// result ⊇ exact product set; endpoint enumeration handles all sign cases.
inline Interval iv_mul(const Interval& a, const Interval& b) { return a * b; }

/// result ⊇ exact quotient set, outward-rounded to prec fractional bits.
/// Throws DivisionByZeroInterval when 0 ∈ b.
Interval iv_div(const Interval& a, const Interval& b, std::int64_t prec);

/// Enclosure of {ln x : x ∈ a}; requires a.lo > 0 (DomainError otherwise).
/// Argument reduction to [1/2, 1) plus an atanh series with the truncation
/// remainder folded into the enclosure.
Interval iv_log(const Interval& a, std::int64_t prec);

/// Enclosure of {e^x : x ∈ a}.
Interval iv_exp(const Interval& a, std::int64_t prec);

/// Enclosure of {x^nu : x ∈ a}. Integer nu by binary powering (any sign of a
/// when nu >= 0); rational nu via exp(nu * ln x), requiring a.lo > 0.
Interval iv_pow(const Interval& a, const Rational& nu, std::int64_t prec);

/// Shared enclosure of ln 2, cached and refined on demand.
Interval ln2_enclosure(std::int64_t prec);

/// Enclosure of ln d for a single dyadic point.
Interval log_point(const Dyadic& d, std::int64_t prec);

/// Enclosure of e^d for a single dyadic point.
Interval exp_point(const Dyadic& d, std::int64_t prec);

}  // namespace brjuno
