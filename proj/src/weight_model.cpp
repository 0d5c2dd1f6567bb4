#include "brjuno/weight_model.hpp"

#include <random>

#include <nlohmann/json.hpp>

#include "brjuno/errors.hpp"

namespace brjuno {

namespace {
using json = nlohmann::ordered_json;

Rational default_c_log_pow(unsigned n) {
    // sup |u'| (x)^2 = sup n x (-ln x)^{n-1} <= n * ((n-1)/e)^{n-1}; the crude
    // integer bound 2 n^n is comfortably above it for every n >= 1.
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), n, n);
    return Rational(mpz_class(2 * p));
}
}  // namespace

WeightModel WeightModel::log_pow(unsigned n, Rational s0, std::optional<Rational> c) {
    if (n < 1) throw DomainError("log_pow exponent must be >= 1");
    WeightModel w;
    w.kind_ = Kind::LogPow;
    w.n_ = n;
    w.s0_ = std::move(s0);
    w.c_declared_ = c.has_value();
    w.c_ = c.value_or(default_c_log_pow(n));
    return w;
}

WeightModel WeightModel::inverse(Rational s0, std::optional<Rational> c) {
    WeightModel w;
    w.kind_ = Kind::Inverse;
    w.s0_ = std::move(s0);
    w.c_declared_ = c.has_value();
    w.c_ = c.value_or(Rational(2));
    return w;
}

WeightModel WeightModel::custom(Expr expr, Rational s0, std::optional<Rational> c) {
    WeightModel w;
    w.kind_ = Kind::Custom;
    w.s0_ = std::move(s0);
    w.c_declared_ = c.has_value();
    w.c_ = c.value_or(Rational(0));
    w.expr_ = std::make_shared<Expr>(expr);
    w.dexpr_ = std::make_shared<Expr>(expr.derivative());
    return w;
}

Interval WeightModel::eval(const Interval& x, std::int64_t prec) const {
    if (Rational(x.lo()) <= s0_) throw DomainError("weight evaluated at or below s0");
    switch (kind_) {
        case Kind::LogPow: {
            const Interval neg_log = -iv_log(x, prec + 8);
            if (n_ == 1) return neg_log.round_out(prec);
            return iv_pow(neg_log, Rational(static_cast<long>(n_)), prec);
        }
        case Kind::Inverse:
            return iv_div(Interval(Dyadic(1)), x, prec);
        case Kind::Custom:
            return expr_->eval(x, prec);
    }
    throw DomainError("unreachable weight kind");
}

Interval WeightModel::derivative(const Interval& x, std::int64_t prec) const {
    if (Rational(x.lo()) <= s0_) throw DomainError("weight derivative at or below s0");
    switch (kind_) {
        case Kind::LogPow: {
            // u'(x) = -n (-ln x)^{n-1} / x
            const Interval neg_log = -iv_log(x, prec + 8);
            Interval p(Dyadic(1));
            if (n_ >= 2) p = iv_pow(neg_log, Rational(static_cast<long>(n_ - 1)), prec + 8);
            const Interval nn(Dyadic(mpz_class(static_cast<unsigned long>(n_)), 0));
            return -iv_div(nn * p, x, prec);
        }
        case Kind::Inverse: {
            const Interval sq = (x * x).round_out(prec + 8);
            return -iv_div(Interval(Dyadic(1)), sq, prec);
        }
        case Kind::Custom:
            return dexpr_->eval(x, prec);
    }
    throw DomainError("unreachable weight kind");
}

std::string WeightModel::to_config_json() const {
    json j;
    switch (kind_) {
        case Kind::LogPow:
            j["type"] = "log_pow";
            j["n"] = n_;
            break;
        case Kind::Inverse:
            j["type"] = "inverse";
            break;
        case Kind::Custom:
            j["type"] = "custom";
            j["expr"] = json::parse(expr_->to_json_text());
            break;
    }
    if (c_declared_) j["C"] = c_.to_string();
    return j.dump();
}

namespace {

Interval abs_interval(const Interval& d) {
    if (d.lo().sign() >= 0) return d;
    if (d.hi().sign() <= 0) return -d;
    return Interval(Dyadic(0), std::max(d.hi(), (-d).hi()));
}

}  // namespace

CheckVerdict u_derivative_bound_check(const WeightModel& w, const MapModel& map,
                                      unsigned samples, std::int64_t prec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Rational span = map.s1() - map.s0();
    const Rational s0 = map.s0();
    double worst = 1e300;
    Rational fit(0);
    bool pass = true;
    for (unsigned k = 0; k < samples; ++k) {
        // Dyadic grid samples, quadratically biased toward s0 where the
        // bound is tight.
        const std::uint64_t r = (rng() % ((1ULL << 20) - 2)) + 1;
        const Rational t0 = Rational(Dyadic(mpz_class(static_cast<unsigned long>(r)), -20));
        const Rational tsq = t0 * t0;
        const Rational width = Rational(Dyadic(1, -24)) * span;
        Rational x_lo = s0 + span * tsq;
        Rational x_hi = x_lo + width;
        if (x_hi >= map.s1()) x_hi = (x_lo + map.s1()) * Rational(1, 2);
        const Interval x(x_lo.floor_to(prec + 16), x_hi.ceil_to(prec + 16));
        const Interval du = abs_interval(w.derivative(x, prec + 8));
        const Interval xs = x - Interval::of_rational(s0, prec + 16);
        const Interval lhs = (du * xs * xs).round_out(prec);
        fit = std::max(fit, Rational(lhs.hi()));
        const Rational margin = w.c_constant() - Rational(lhs.hi());
        worst = std::min(worst, margin.to_double());
        if (margin.sign() <= 0) pass = false;
    }
    CheckVerdict v;
    if (w.c_declared() || w.kind() != WeightModel::Kind::Custom) {
        v.pass = pass;
        v.worst_margin = worst;
        v.detail = "certified |u'|(x-s0)^2 < C on " + std::to_string(samples) +
                   " subintervals; C = " + w.c_constant().to_string();
    } else {
        // No declared C: report the scan fit (heuristic, not a proof).
        v.pass = true;
        v.worst_margin = 0.0;
        v.detail = "auto-fitted C >= " + fit.to_string() + " over " + std::to_string(samples) +
                   " samples (heuristic fit, not a proof)";
    }
    return v;
}

CheckVerdict u_ratio_condition_check(const WeightModel& w, const MapModel& map, Digit n_max,
                                     std::int64_t prec) {
    CheckVerdict v;
    if (map.s1() < Rational(1)) {
        v.pass = true;
        v.detail = "vacuous: s1 < 1";
        v.worst_margin = (Rational(1) - map.s1()).to_double();
        return v;
    }
    auto ratio = [&](Digit n, std::int64_t p) {
        const Interval top_in = map.inverse_branch(
            1, map.inverse_branch(n, Interval::of_rational(map.s1(), p), p), p);
        const Interval bot_in = map.inverse_branch(
            1, map.inverse_branch(n, Interval::of_rational(map.s0(), p), p), p);
        return iv_div(w.eval(top_in, p), w.eval(bot_in, p), p);
    };
    double worst = 1e300;
    Interval prev = ratio(1, prec + 16);
    if (prev.lo().sign() <= 0) {
        v.pass = false;
        v.detail = "v(1) not certified positive";
        return v;
    }
    for (Digit n = 2; n <= n_max; ++n) {
        std::int64_t p = prec + 16;
        for (;;) {
            const Interval cur = ratio(n, p);
            if (cur.lo().sign() > 0 && cur.lo() >= prev.hi()) {
                worst = std::min(worst, (cur.lo() - prev.hi()).to_double());
                prev = cur;
                break;
            }
            if (cur.hi() < prev.lo()) {
                v.pass = false;
                v.detail = "v(N) decreased at N = " + std::to_string(n);
                return v;
            }
            p *= 2;
            if (p > 64 * prec + 4096) {
                v.pass = false;
                v.detail = "could not certify monotonicity at N = " + std::to_string(n);
                return v;
            }
            prev = ratio(n - 1, p);
        }
    }
    v.pass = true;
    v.worst_margin = worst;
    v.detail = "v(N) > 0 and non-decreasing for N <= " + std::to_string(n_max);
    return v;
}

WeightModel weight_from_json(const std::string& text, const Rational& s0) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad weight JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("type")) throw ParseError("weight config needs a type");
    std::optional<Rational> c;
    if (j.contains("C") && !j.at("C").is_null())
        c = Rational::parse(j.at("C").get<std::string>());
    const std::string type = j.at("type").get<std::string>();
    if (type == "log_pow") return WeightModel::log_pow(j.value("n", 1u), s0, c);
    if (type == "inverse") return WeightModel::inverse(s0, c);
    if (type == "custom")
        return WeightModel::custom(Expr::from_json_text(j.at("expr").dump()), s0, c);
    throw ParseError("unknown weight type: " + type);
}

}  // namespace brjuno
