#include "brjuno/dyadic.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "brjuno/errors.hpp"

namespace brjuno {

void Dyadic::normalize() {
    if (mantissa_ == 0) {
        exponent_ = 0;
        return;
    }
    // Strip trailing zero bits so the mantissa is odd.
    const mp_bitcnt_t twos = mpz_scan1(mantissa_.get_mpz_t(), 0);
    if (twos > 0) {
        mpz_fdiv_q_2exp(mantissa_.get_mpz_t(), mantissa_.get_mpz_t(), twos);
        exponent_ += static_cast<std::int64_t>(twos);
    }
}

Dyadic Dyadic::operator+(const Dyadic& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    const std::int64_t e = std::min(exponent_, o.exponent_);
    mpz_class a = mantissa_;
    mpz_class b = o.mantissa_;
    if (exponent_ > e) mpz_mul_2exp(a.get_mpz_t(), a.get_mpz_t(), exponent_ - e);
    if (o.exponent_ > e) mpz_mul_2exp(b.get_mpz_t(), b.get_mpz_t(), o.exponent_ - e);
    return Dyadic(a + b, e);
}

int Dyadic::compare(const Dyadic& o) const {
    const int s = sign(), t = o.sign();
    if (s != t) return s < t ? -1 : 1;
    if (s == 0) return 0;
    // Binary scales decide unless the magnitudes are within a factor of two;
    // this keeps comparisons of wildly different scales shift-free.
    const std::int64_t sa =
        exponent_ + static_cast<std::int64_t>(mpz_sizeinbase(mantissa_.get_mpz_t(), 2));
    const std::int64_t sb =
        o.exponent_ + static_cast<std::int64_t>(mpz_sizeinbase(o.mantissa_.get_mpz_t(), 2));
    if (sa != sb) return ((sa < sb) == (s > 0)) ? -1 : 1;
    const Dyadic d = *this - o;
    return d.sign();
}

Dyadic Dyadic::round_to(std::int64_t prec, bool up) const {
    if (is_zero()) return Dyadic();
    if (exponent_ >= -prec) return *this;  // already on the grid
    const std::int64_t k = -prec - exponent_;
    mpz_class q;
    if (up) {
        mpz_cdiv_q_2exp(q.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
    } else {
        mpz_fdiv_q_2exp(q.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
    }
    return Dyadic(q, -prec);
}

mpz_class Dyadic::floor() const {
    if (exponent_ >= 0) {
        mpz_class r = mantissa_;
        mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), static_cast<mp_bitcnt_t>(exponent_));
        return r;
    }
    mpz_class q;
    mpz_fdiv_q_2exp(q.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<mp_bitcnt_t>(-exponent_));
    return q;
}

std::string Dyadic::to_string() const {
    std::ostringstream os;
    os << mantissa_.get_str() << "*2^" << exponent_;
    return os.str();
}

std::string Dyadic::to_decimal(int digits) const {
    // value * 10^digits, floored; exact integer arithmetic throughout.
    mpz_class scaled = mantissa_;
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    scaled *= pow10;
    if (exponent_ >= 0) {
        mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), static_cast<mp_bitcnt_t>(exponent_));
    } else {
        mpz_fdiv_q_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), static_cast<mp_bitcnt_t>(-exponent_));
    }
    const bool neg = scaled < 0;
    if (neg) scaled = -scaled;
    std::string s = scaled.get_str();
    if (static_cast<int>(s.size()) <= digits) s.insert(0, digits + 1 - s.size(), '0');
    s.insert(s.size() - digits, ".");
    if (neg) s.insert(0, "-");
    return s;
}

double Dyadic::to_double() const {
    return mpz_get_d(mantissa_.get_mpz_t()) * std::ldexp(1.0, static_cast<int>(std::max<std::int64_t>(
               std::min<std::int64_t>(exponent_, 4000), -4000)));
}

Dyadic Dyadic::parse(const std::string& text) {
    std::string s = text;
    // trim
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s.empty()) throw ParseError("empty dyadic literal");

    const auto star = s.find("*2^");
    if (star != std::string::npos) {
        const std::string ms = s.substr(0, star);
        const std::string es = s.substr(star + 3);
        try {
            mpz_class m(ms);
            const std::int64_t e = std::stoll(es);
            return Dyadic(m, e);
        } catch (const std::exception&) {
            throw ParseError("bad dyadic literal: " + text);
        }
    }

    const auto dot = s.find('.');
    std::string intpart = dot == std::string::npos ? s : s.substr(0, dot);
    std::string fracpart = dot == std::string::npos ? "" : s.substr(dot + 1);
    if (intpart.empty() || intpart == "-" || intpart == "+") intpart += "0";
    for (char c : fracpart)
        if (!std::isdigit(static_cast<unsigned char>(c))) throw ParseError("bad dyadic literal: " + text);
    try {
        mpz_class digits_num(intpart + fracpart);
        mpz_class pow10;
        mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(fracpart.size()));
        mpq_class q(digits_num, pow10);
        q.canonicalize();
        // Denominator must be a power of two.
        mpz_class den = q.get_den();
        if (den == 0) throw ParseError("bad dyadic literal: " + text);
        const mp_bitcnt_t low = mpz_scan1(den.get_mpz_t(), 0);
        mpz_class shifted;
        mpz_fdiv_q_2exp(shifted.get_mpz_t(), den.get_mpz_t(), low);
        if (shifted != 1)
            throw ParseError("not an exact dyadic: " + text);
        return Dyadic(q.get_num(), -static_cast<std::int64_t>(low));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("bad dyadic literal: " + text);
    }
}

}  // namespace brjuno
