#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "brjuno/expr.hpp"
#include "brjuno/interval.hpp"
#include "brjuno/map_model.hpp"
#include "brjuno/rational.hpp"

namespace brjuno {

/// Weight function u > 0 on (s0, s1), certified-evaluable, with a declared
/// derivative-bound constant C for |u'(x)| < C/(x-s0)^2. Built-in kinds:
/// log_pow(n) = (ln(1/x))^n and inverse = 1/x; custom weights supply an
/// expression tree, which is also their evaluator and computability witness.
class WeightModel {
public:
    enum class Kind { LogPow, Inverse, Custom };

    static WeightModel log_pow(unsigned n, Rational s0 = Rational(0),
                               std::optional<Rational> c = std::nullopt);
    static WeightModel inverse(Rational s0 = Rational(0),
                               std::optional<Rational> c = std::nullopt);
    static WeightModel custom(Expr expr, Rational s0, std::optional<Rational> c = std::nullopt);

    Kind kind() const { return kind_; }
    unsigned log_exponent() const { return n_; }
    const Rational& s0() const { return s0_; }
    /// Declared C; 0 when the user left it to the scan.
    const Rational& c_constant() const { return c_; }
    bool c_declared() const { return c_declared_; }

    /// Certified enclosure of u over x; requires x.lo > s0 (DomainError).
    Interval eval(const Interval& x, std::int64_t prec) const;

    /// Certified enclosure of u' over x (closed form for built-ins, symbolic
    /// derivative for custom weights).
    Interval derivative(const Interval& x, std::int64_t prec) const;

    std::string to_config_json() const;

private:
    WeightModel() = default;

    Kind kind_ = Kind::LogPow;
    unsigned n_ = 1;
    Rational s0_;
    Rational c_;
    bool c_declared_ = false;
    std::shared_ptr<const Expr> expr_;
    std::shared_ptr<const Expr> dexpr_;
};

/// Outcome of a certified check with the worst observed margin.
struct CheckVerdict {
    bool pass = false;
    std::string detail;
    double worst_margin = 0.0;
};

/// Certifies |u'| (x - s0)^2 < C on `samples` random subintervals of
/// (s0, s1), using the closed-form derivative. With no declared C, scans for
/// the smallest power-of-two C that passes and reports it (a fit, not a
/// proof; noted in the detail).
CheckVerdict u_derivative_bound_check(const WeightModel& w, const MapModel& map,
                                      unsigned samples, std::int64_t prec,
                                      std::uint64_t seed = 1);

/// Certifies v(N) = u(G_1^{-1}(G_N^{-1}(s1))) / u(G_1^{-1}(G_N^{-1}(s0))) > 0
/// and non-decreasing for N <= n_max. Vacuous pass when s1 < 1.
CheckVerdict u_ratio_condition_check(const WeightModel& w, const MapModel& map,
                                     Digit n_max, std::int64_t prec);

/// Builds a weight from {"type":"log_pow","n":1} | {"type":"inverse"} |
/// {"type":"custom","expr":...}, with optional "C":"rational". The domain
/// left endpoint comes from the paired map.
WeightModel weight_from_json(const std::string& text, const Rational& s0);

}  // namespace brjuno
