#include "brjuno/rational.hpp"

#include "brjuno/errors.hpp"

namespace brjuno {

Rational::Rational(const Dyadic& d) {
    if (d.exponent() >= 0) {
        mpz_class n = d.mantissa();
        mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), static_cast<mp_bitcnt_t>(d.exponent()));
        q_ = mpq_class(n);
    } else {
        mpz_class den(1);
        mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(-d.exponent()));
        q_ = mpq_class(d.mantissa(), den);
        q_.canonicalize();
    }
}

Rational Rational::operator/(const Rational& o) const {
    if (o.is_zero()) throw DomainError("rational division by zero");
    return Rational(mpq_class(q_ / o.q_));
}

Rational Rational::parse(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            mpq_class q(text);
            if (q.get_den() == 0) throw ParseError("zero denominator: " + text);
            q.canonicalize();
            return Rational(q);
        }
        if (text.find('.') != std::string::npos || text.find("*2^") != std::string::npos) {
            return Rational(Dyadic::parse(text));
        }
        return Rational(mpq_class(text));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("bad rational literal: " + text);
    }
}

Dyadic Rational::floor_to(std::int64_t prec) const {
    // floor(q * 2^prec) / 2^prec
    mpz_class num = q_.get_num();
    mpz_class den = q_.get_den();
    if (prec >= 0) {
        mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(prec));
    } else {
        mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(-prec));
    }
    mpz_class t;
    mpz_fdiv_q(t.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return Dyadic(t, -prec);
}

Dyadic Rational::ceil_to(std::int64_t prec) const {
    mpz_class num = q_.get_num();
    mpz_class den = q_.get_den();
    if (prec >= 0) {
        mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(prec));
    } else {
        mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(-prec));
    }
    mpz_class t;
    mpz_cdiv_q(t.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return Dyadic(t, -prec);
}

}  // namespace brjuno
