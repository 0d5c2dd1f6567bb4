#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "brjuno/cf_engine.hpp"
#include "brjuno/interval.hpp"
#include "brjuno/map_model.hpp"
#include "brjuno/rational.hpp"
#include "brjuno/weight_model.hpp"

namespace brjuno {

/// Sign sequence s(i) in {-1, +1}; alternating means s(i) = (-1)^{i+1}.
class SignSpec {
public:
    enum class Kind { Constant, Alternating, Periodic };

    static SignSpec constant() { return SignSpec(Kind::Constant, {1}); }
    static SignSpec alternating() { return SignSpec(Kind::Alternating, {1, -1}); }
    static SignSpec periodic(std::vector<int> pattern);

    Kind kind() const { return kind_; }
    /// s(i), 1-based.
    int at(std::uint64_t i) const { return pattern_[(i - 1) % pattern_.size()]; }
    std::uint64_t period() const { return pattern_.size(); }
    bool is_constant() const { return kind_ == Kind::Constant; }

    static SignSpec parse(const std::string& text);
    std::string to_string() const;

private:
    SignSpec(Kind kind, std::vector<int> pattern)
        : kind_(kind), pattern_(std::move(pattern)) {}
    Kind kind_;
    std::vector<int> pattern_;
};

/// The data defining one generalized Brjuno-type function
///   Phi(x) = sum_i s(i) (eta_0 ... eta_{i-1})^nu u(eta_i).
struct BrjunoSpec {
    std::shared_ptr<const MapModel> map;
    WeightModel weight;
    Rational nu;
    SignSpec sign = SignSpec::constant();

    static BrjunoSpec make(std::shared_ptr<const MapModel> map, WeightModel weight,
                           Rational nu, SignSpec sign = SignSpec::constant());
};

/// Running state of a k-term partial sum.
struct PartialSumState {
    std::uint64_t k = 0;
    Interval product_pow_nu;  // (eta_1 ... eta_k)^nu
    Interval product;         // eta_1 ... eta_k, unpowered
    Interval sum;             // enclosure of f(., k)
    DigitWord consumed;       // digits read from the stream
};

/// Enclosure of the k-term partial sum, built incrementally. All-ones and
/// periodic tails use exact point enclosures for the eta_i; generator tails
/// enclose eta_i by the cylinder of the remaining known prefix (digits
/// 1..k+1 must be pullable).
PartialSumState partial_sum(const BrjunoSpec& spec, const DigitStream& x, std::uint64_t k,
                            std::int64_t prec);

/// Uniform bound rho < 1 with eta_{k-1} eta_k < rho on the invariant set.
struct RhoBound {
    Rational rho;
    Rational a_star, b_star;
};

/// rho = s1 when s1 < 1; otherwise a_* is taken at the certified fixed-point
/// enclosure of the first branch (or at the supplied override) and
/// b_* = sup G_1([a_*, 1)).
RhoBound rho_bound(const MapModel& map, std::int64_t prec,
                   std::optional<Rational> a_star_override = std::nullopt);

/// Full evaluation byproducts for an eventually-periodic point.
struct ClosedEval {
    Interval value;               // Phi enclosure, width <= 2^-prec
    Interval head_product;        // eta_1 .. eta_{m0}, unpowered
    std::vector<Interval> etas;   // eta_1 .. eta_{m0}
    std::vector<Interval> terms;  // signed head terms
    Interval tail_point;          // the tail's phase-0 point (phi for ones)
    Interval u_tail_point;        // u at that point
};

/// Phi([head, pattern, pattern, ...]) by finite head sum plus the geometric
/// closed form of the periodic tail; works for any periodic sign pattern.
ClosedEval eval_eventually_periodic(const BrjunoSpec& spec, const DigitWord& head,
                                    const DigitWord& pattern, std::int64_t prec);

/// Phi([head, 1, 1, ...]); the all-ones case of the closed form.
Interval eval_eventually_ones(const BrjunoSpec& spec, const DigitWord& head,
                              std::int64_t prec);

/// Certifies overlap of Phi(x) with u(x) + x^nu Phi(G(x)) for
/// x = [head, 1, 1, ...]; constant sign, non-empty head.
struct CohomologyCheck {
    bool overlap = false;
    Interval lhs, rhs;
};
CohomologyCheck cohomology_check(const BrjunoSpec& spec, const DigitWord& head,
                                 std::int64_t prec);

/// Stream of certified bounds on Phi(x). With constant sign, emits a
/// non-decreasing sequence of lower bounds; a digit bound A additionally
/// unlocks upper bounds via the sup of u over the bounded-digit cylinders and
/// the rho-geometric tail envelope. Non-constant signs require a digit bound
/// and emit two-sided enclosures without a monotonicity claim.
class EnclosureSequence {
public:
    struct Item {
        std::uint64_t k = 0;
        Dyadic lo;
        std::optional<Dyadic> hi;
    };

    EnclosureSequence(BrjunoSpec spec, DigitStream x, std::optional<Digit> digit_bound,
                      std::int64_t prec, bool want_upper);

    /// Bound after one more term; throws InsufficientDigits at stream end.
    Item next();
    std::uint64_t emitted() const { return k_; }

private:
    BrjunoSpec spec_;
    DigitStream x_;
    std::optional<Digit> digit_bound_;
    std::int64_t prec_;
    bool want_upper_;
    std::uint64_t k_ = 0;
    Dyadic best_lo_;
    bool have_lo_ = false;
    Interval tail_factor_;  // u_sup * 2/(1 - rho^nu), when upper bounds are on
};

}  // namespace brjuno
