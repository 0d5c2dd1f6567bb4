#include "brjuno/interval.hpp"

#include <algorithm>
#include <mutex>

#include "brjuno/errors.hpp"

namespace brjuno {

Interval::Interval(Dyadic lo, Dyadic hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (hi_ < lo_) throw DomainError("interval endpoints out of order");
}

Interval Interval::of_rational(const Rational& q, std::int64_t prec) {
    return Interval(q.floor_to(prec), q.ceil_to(prec));
}

Interval Interval::hull(const Interval& a, const Interval& b) {
    return Interval(std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_));
}

Dyadic Interval::mid() const { return (lo_ + hi_).mul_pow2(-1); }

bool Interval::contains(const Rational& x) const {
    return Rational(lo_) <= x && x <= Rational(hi_);
}

Interval Interval::intersect(const Interval& o) const {
    const Dyadic l = std::max(lo_, o.lo_);
    const Dyadic h = std::min(hi_, o.hi_);
    if (h < l) throw DomainError("empty intersection");
    return Interval(l, h);
}

Interval Interval::operator*(const Interval& o) const {
    const Dyadic c1 = lo_ * o.lo_;
    const Dyadic c2 = lo_ * o.hi_;
    const Dyadic c3 = hi_ * o.lo_;
    const Dyadic c4 = hi_ * o.hi_;
    return Interval(std::min(std::min(c1, c2), std::min(c3, c4)),
                    std::max(std::max(c1, c2), std::max(c3, c4)));
}

namespace {

// floor((x/y) * 2^prec) / 2^prec, exact integer arithmetic.
Dyadic div_dir(const Dyadic& x, const Dyadic& y, std::int64_t prec, bool up) {
    mpz_class num = x.mantissa();
    mpz_class den = y.mantissa();
    std::int64_t s = x.exponent() - y.exponent() + prec;
    if (s >= 0) {
        mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(s));
    } else {
        mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(-s));
    }
    mpz_class q;
    if (up) {
        if (sgn(den) < 0) { num = -num; den = -den; }
        mpz_cdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    } else {
        if (sgn(den) < 0) { num = -num; den = -den; }
        mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    }
    return Dyadic(q, -prec);
}

}  // namespace

Interval iv_div(const Interval& a, const Interval& b, std::int64_t prec) {
    if (b.contains_zero()) throw DivisionByZeroInterval("0 in divisor interval");
    // Monotonicity in both arguments picks the two extremal quotients.
    if (b.lo().sign() > 0) {
        const Dyadic& dl = a.lo().sign() >= 0 ? b.hi() : b.lo();
        const Dyadic& dh = a.hi().sign() >= 0 ? b.lo() : b.hi();
        return Interval(div_dir(a.lo(), dl, prec, /*up=*/false),
                        div_dir(a.hi(), dh, prec, /*up=*/true));
    }
    const Dyadic& dl = a.hi().sign() <= 0 ? b.lo() : b.hi();
    const Dyadic& dh = a.lo().sign() <= 0 ? b.hi() : b.lo();
    return Interval(div_dir(a.hi(), dl, prec, /*up=*/false),
                    div_dir(a.lo(), dh, prec, /*up=*/true));
}

namespace {

// Enclosure of atanh(z) for an interval z with |z| <= 1/2, by the odd power
// series with the truncation remainder folded in.
Interval atanh_series(const Interval& z, std::int64_t wp) {
    const Dyadic zmax = std::max(z.lo().abs(), z.hi().abs());
    if (zmax.is_zero()) return Interval(Dyadic(0));
    // |z| <= 2^-b with b >= 1.
    const std::int64_t mag =
        zmax.exponent() + static_cast<std::int64_t>(mpz_sizeinbase(zmax.mantissa().get_mpz_t(), 2));
    if (mag > -1) throw DomainError("atanh series argument too large");
    const std::int64_t b = -mag;
    // Remainder after K terms: sum_{k>K} |z|^{2k+1}/(2k+1) <= (4/3)|z|^{2K+3}.
    std::int64_t K = (wp + 2) / (2 * b) + 1;
    const Interval z2 = (z * z).round_out(wp);
    Interval sum = z;
    Interval p = z;
    for (std::int64_t k = 1; k <= K; ++k) {
        p = (p * z2).round_out(wp);
        sum = sum + iv_div(p, Interval(Dyadic(2 * k + 1)), wp);
    }
    const Dyadic rem = Dyadic::pow2(-(2 * K + 3) * b + 1);
    return sum + Interval(-rem, rem);
}

struct CachedConstant {
    std::mutex mutex;
    Interval value;
    std::int64_t prec = -1;
};

Interval ln2_impl(std::int64_t wp) {
    // ln 2 = 2 atanh(1/3)
    const Interval third = iv_div(Interval(Dyadic(1)), Interval(Dyadic(3)), wp + 4);
    const Interval at = atanh_series(third, wp + 4);
    return (at + at).round_out(wp);
}

// e^f for 0 <= f <= 1, by the exponential series.
Interval exp_frac(const Dyadic& f, std::int64_t wp) {
    if (f.sign() < 0 || Dyadic(1) < f) throw DomainError("exp_frac argument outside [0,1]");
    Interval sum(Dyadic(1));
    Interval term(Dyadic(1));
    const Interval fi((f));
    for (long k = 1;; ++k) {
        term = iv_div(term * fi, Interval(Dyadic(k)), wp + 4);
        sum = (sum + term).round_out(wp + 4);
        // For k >= 1 and f <= 1 the dropped tail is at most the last term.
        if (term.hi() <= Dyadic::pow2(-wp - 2)) {
            return sum + Interval(Dyadic(0), term.hi());
        }
        if (k > 4 * wp + 64) throw DomainError("exp series failed to converge");
    }
}

Interval e_impl(std::int64_t wp) { return exp_frac(Dyadic(1), wp); }

Interval cached_constant(CachedConstant& c, std::int64_t prec, Interval (*compute)(std::int64_t)) {
    std::lock_guard<std::mutex> lock(c.mutex);
    if (c.prec < prec) {
        const std::int64_t target = std::max<std::int64_t>(256, 2 * prec);
        c.value = compute(target);
        c.prec = target;
    }
    return c.value.round_out(prec);
}

CachedConstant g_ln2;
CachedConstant g_e;

Interval scale_int(const Interval& a, std::int64_t k) {
    const Interval ki{Dyadic(mpz_class(static_cast<long>(k)), 0)};
    return a * ki;
}

}  // namespace

Interval ln2_enclosure(std::int64_t prec) { return cached_constant(g_ln2, prec, ln2_impl); }

Interval log_point(const Dyadic& d, std::int64_t prec) {
    if (d.sign() <= 0) throw DomainError("log of non-positive value");
    const std::int64_t wp = prec + 16;
    // d = f * 2^E with f in [1/2, 1).
    const std::int64_t bits =
        static_cast<std::int64_t>(mpz_sizeinbase(d.mantissa().get_mpz_t(), 2));
    const std::int64_t E = d.exponent() + bits;
    const Dyadic f(d.mantissa(), -bits);
    Interval result;
    if (d.mantissa() == 1) {
        // f is exactly 1/2: ln d = (E-1) ln 2.
        result = scale_int(ln2_enclosure(wp), E - 1);
    } else {
        const Dyadic one(1);
        const Interval z = iv_div(Interval(f - one), Interval(f + one), wp + 8);
        const Interval lnf = (atanh_series(z, wp + 8) * Interval(Dyadic(2)));
        result = lnf + scale_int(ln2_enclosure(wp + 8), E);
    }
    return result.round_out(prec + 4);
}

Interval iv_log(const Interval& a, std::int64_t prec) {
    if (a.lo().sign() <= 0) throw DomainError("log of interval reaching 0");
    if (a.is_point()) return log_point(a.lo(), prec);
    return Interval(log_point(a.lo(), prec).lo(), log_point(a.hi(), prec).hi());
}

Interval exp_point(const Dyadic& d, std::int64_t prec) {
    if (d.is_zero()) return Interval(Dyadic(1));
    if (d.sign() < 0) {
        const Interval pos = exp_point(-d, prec + 4);
        return iv_div(Interval(Dyadic(1)), pos, prec + 2).round_out(prec);
    }
    const mpz_class ipart = d.floor();
    if (ipart > 1 << 20) throw DomainError("exp argument beyond overflow budget");
    const unsigned long i = ipart.get_ui();
    const std::int64_t ibits = i == 0 ? 0 : static_cast<std::int64_t>(mpz_sizeinbase(ipart.get_mpz_t(), 2));
    const std::int64_t wp = prec + 2 * ibits + 16;
    const Dyadic f = d - Dyadic(ipart, 0);
    Interval result = exp_frac(f, wp);
    if (i > 0) {
        // Binary powering of the e enclosure; absolute rounding keeps the
        // relative error at ~2^-wp per step because every value is >= 1.
        Interval base = cached_constant(g_e, wp, e_impl);
        Interval p(Dyadic(1));
        unsigned long n = i;
        while (n > 0) {
            if (n & 1UL) p = (p * base).round_out(wp);
            n >>= 1UL;
            if (n > 0) base = (base * base).round_out(wp);
        }
        result = (result * p).round_out(wp);
    }
    return result.round_out(prec + 4);
}

Interval iv_exp(const Interval& a, std::int64_t prec) {
    if (a.is_point()) return exp_point(a.lo(), prec);
    return Interval(exp_point(a.lo(), prec).lo(), exp_point(a.hi(), prec).hi());
}

namespace {

Interval ipow(const Interval& a, unsigned long n, std::int64_t prec) {
    Interval result(Dyadic(1));
    Interval base = a;
    while (n > 0) {
        if (n & 1UL) result = (result * base).round_out(prec + 16);
        n >>= 1UL;
        if (n > 0) base = (base * base).round_out(prec + 16);
    }
    return result;
}

}  // namespace

Interval iv_pow(const Interval& a, const Rational& nu, std::int64_t prec) {
    if (nu.is_zero()) return Interval(Dyadic(1));
    if (nu.is_integer()) {
        mpz_class n = nu.numerator();
        const bool negative = n < 0;
        if (negative) n = -n;
        if (n > 1 << 16) throw DomainError("integer exponent beyond budget");
        if (n == 1 && !negative) return a.round_out(prec + 8);
        Interval p = ipow(a, n.get_ui(), prec);
        if (negative) p = iv_div(Interval(Dyadic(1)), p, prec + 4);
        return p.round_out(prec + 4);
    }
    if (a.lo().sign() <= 0) throw DomainError("fractional power of interval reaching 0");
    const std::int64_t wp = prec + 24;
    const Interval nuI = Interval::of_rational(nu, wp);
    auto pow_pt = [&](const Dyadic& x) {
        const Interval lx = log_point(x, wp);
        return iv_exp(lx * nuI, wp);
    };
    Interval at_lo = pow_pt(a.lo());
    if (a.is_point()) return at_lo.round_out(prec + 4);
    Interval at_hi = pow_pt(a.hi());
    if (nu.sign() < 0) std::swap(at_lo, at_hi);
    return Interval(at_lo.lo(), at_hi.hi()).round_out(prec + 4);
}

}  // namespace brjuno
